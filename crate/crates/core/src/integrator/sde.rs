use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::jumps::{sample_jumps, JumpEvent};
use super::recorder::Recorder;
use super::{MartingaleTerms, Scheme, SimConfig, Trajectory, LOG_CEILING, LOG_FLOOR};
use crate::error::{Error, Result};
use crate::model::{drift, Compartment, CrispModel, State};

/// Independent generators for one path: Gaussian increments and the jump
/// process live on separate ChaCha streams of the same seed.
pub(crate) fn path_rngs(seed: u64, path: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut gauss = ChaCha8Rng::seed_from_u64(seed);
    gauss.set_stream(path.wrapping_mul(2));
    let mut jumps = ChaCha8Rng::seed_from_u64(seed);
    jumps.set_stream(path.wrapping_mul(2).wrapping_add(1));
    (gauss, jumps)
}

/// State-dependent part of the log drift:
/// `(D S0/S - D - m1 x/delta1, m1 S - m2 y/delta2 - D, m2 x - D)`.
pub fn log_drift(model: &CrispModel, s: &[f64; 3]) -> [f64; 3] {
    [
        model.d * model.s0 / s[0] - model.d - model.m1 * s[1] / model.delta1,
        model.m1 * s[0] - model.m2 * s[2] / model.delta2 - model.d,
        model.m2 * s[1] - model.d,
    ]
}

/// The state-independent stochastic part of the log dynamics.
///
/// Over a jump-free substep of length `h` each log-coordinate moves by
/// `-(sigma_i^2/2 + sum_k gamma_i(u_k) lambda_k) h + sigma_i sqrt(h) xi_i`;
/// a jump with mark `k` adds `ln(1 + gamma_i(u_k))`. The `sum gamma lambda`
/// term is the compensator of the Poisson measure.
#[derive(Debug, Clone)]
pub struct LogNoise {
    sigma: [f64; 3],
    correction: [f64; 3],
    log_jumps: Vec<[f64; 3]>,
}

impl LogNoise {
    pub fn new(model: &CrispModel) -> Self {
        let sigma = model.sigmas();
        let correction = Compartment::ALL
            .map(|c| 0.5 * sigma[c.index()].powi(2) + model.jumps.compensator(c));
        let log_jumps = model
            .jumps
            .marks
            .iter()
            .map(|m| m.gammas().map(f64::ln_1p))
            .collect();
        Self {
            sigma,
            correction,
            log_jumps,
        }
    }

    pub fn diffusion(&self, h: f64, normals: &[f64; 3]) -> [f64; 3] {
        let sq = h.sqrt();
        std::array::from_fn(|i| -self.correction[i] * h + self.sigma[i] * sq * normals[i])
    }

    pub fn jump(&self, mark: usize) -> [f64; 3] {
        self.log_jumps[mark]
    }
}

/// Isolated stochastic log-increment over an interval of length `duration`
/// containing the given jump marks: the sum of [`LogNoise::diffusion`] with
/// the supplied normals and [`LogNoise::jump`] for every mark.
pub fn log_increment(noise: &LogNoise, duration: f64, normals: &[f64; 3], marks: &[usize]) -> [f64; 3] {
    let mut inc = noise.diffusion(duration, normals);
    for &k in marks {
        let j = noise.jump(k);
        for i in 0..3 {
            inc[i] += j[i];
        }
    }
    inc
}

/// Integrates the stochastic system for path 0 of `config.seed`.
pub fn simulate(model: &CrispModel, config: &SimConfig) -> Result<Trajectory> {
    simulate_path(model, config, 0)
}

/// Integrates one path; `path` selects the random streams derived from
/// `config.seed`, so distinct paths are independent and any path can be
/// reproduced on its own.
pub fn simulate_path(model: &CrispModel, config: &SimConfig, path: u64) -> Result<Trajectory> {
    config.check()?;
    model.check()?;

    let (mut gauss, mut jump_rng) = path_rngs(config.seed, path);
    let events = sample_jumps(&model.jumps, config.t_end, &mut jump_rng);
    let noise = LogNoise::new(model);

    let mut rec = Recorder::new(config);
    let mut state = config.initial.to_array();
    let mut logs = state.map(f64::ln);
    let mut mart = MartingaleTerms::default();
    let mut jump_log_sum = [0.0; 3];
    let mut fine_steps = 0usize;
    let mut pending = events.iter().peekable();
    let sigma = model.sigmas();

    for step in 1..=config.n_steps() {
        let t_next = config.grid_time(step);
        loop {
            let (target, mark) = match pending.peek() {
                Some(e) if e.time <= t_next => (e.time, Some(e.mark)),
                _ => (t_next, None),
            };
            let h = target - rec.time();
            if h > 0.0 {
                let normals: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut gauss));
                let sq = h.sqrt();
                for i in 0..3 {
                    mart.brownian[i] += sigma[i] * sq * normals[i];
                    mart.state_ito[i] += state[i] * sq * normals[i];
                }
                match config.scheme {
                    Scheme::LogEuler => {
                        let growth = log_drift(model, &state);
                        let inc = noise.diffusion(h, &normals);
                        for i in 0..3 {
                            logs[i] += growth[i] * h + inc[i];
                        }
                        check_logs(&logs, target)?;
                        state = logs.map(f64::exp);
                    }
                    Scheme::DirectEuler => {
                        let f = drift(model, &State::from_array(state));
                        for c in Compartment::ALL {
                            let i = c.index();
                            let comp = model.jumps.compensator(c);
                            state[i] += (f[i] - comp * state[i]) * h + sigma[i] * state[i] * sq * normals[i];
                        }
                        check_direct(&state, target)?;
                        logs = state.map(f64::ln);
                    }
                }
                rec.advance(target, state);
                fine_steps += 1;
                apply_floor(&mut logs, &mut state, &mut rec, config.scheme);
            }
            let Some(k) = mark else { break };
            pending.next();
            let j = noise.jump(k);
            match config.scheme {
                Scheme::LogEuler => {
                    for i in 0..3 {
                        logs[i] += j[i];
                    }
                    check_logs(&logs, target)?;
                    state = logs.map(f64::exp);
                }
                Scheme::DirectEuler => {
                    let g = model.jumps.marks[k].gammas();
                    for i in 0..3 {
                        state[i] *= 1.0 + g[i];
                    }
                    check_direct(&state, target)?;
                    logs = state.map(f64::ln);
                }
            }
            for i in 0..3 {
                jump_log_sum[i] += j[i];
            }
            rec.set_state(state);
            apply_floor(&mut logs, &mut state, &mut rec, config.scheme);
            rec.trajectory_mut().jumps.push(JumpEvent { time: target, mark: k });
        }
        rec.flag_extinction(&logs);
        if config.is_recorded(step) {
            rec.record(&logs);
        }
    }

    let t_end = rec.time();
    for c in Compartment::ALL {
        let i = c.index();
        mart.jump[i] = jump_log_sum[i] - t_end * model.jumps.log_compensator(c);
    }
    let traj = rec.trajectory_mut();
    traj.martingales = mart;
    traj.fine_steps = fine_steps;
    Ok(rec.finish())
}

fn check_logs(logs: &[f64; 3], time: f64) -> Result<()> {
    for c in Compartment::ALL {
        let v = logs[c.index()];
        if !v.is_finite() || v > LOG_CEILING {
            return Err(Error::NonFinite {
                time,
                detail: format!("ln {} = {v}", c.symbol()),
            });
        }
    }
    Ok(())
}

fn check_direct(state: &[f64; 3], time: f64) -> Result<()> {
    for c in Compartment::ALL {
        let v = state[c.index()];
        if !v.is_finite() {
            return Err(Error::NonFinite {
                time,
                detail: format!("{} = {v}", c.symbol()),
            });
        }
        if v <= 0.0 {
            return Err(Error::PositivityLost {
                time,
                coordinate: c.symbol(),
                value: v,
            });
        }
    }
    Ok(())
}

/// Clamps log-coordinates below [`LOG_FLOOR`] and flags them.
fn apply_floor(logs: &mut [f64; 3], state: &mut [f64; 3], rec: &mut Recorder, scheme: Scheme) {
    if scheme != Scheme::LogEuler {
        return;
    }
    let mut clamped = false;
    for i in 0..3 {
        if logs[i] < LOG_FLOOR {
            logs[i] = LOG_FLOOR;
            state[i] = LOG_FLOOR.exp();
            rec.flag_floor(i);
            clamped = true;
        }
    }
    if clamped {
        rec.set_state(*state);
    }
}
