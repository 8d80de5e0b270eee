use super::recorder::Recorder;
use super::{SimConfig, Trajectory};
use crate::error::{Error, Result};
use crate::model::{ode_rhs, CrispModel, State};

fn rhs(model: &CrispModel, v: &[f64; 3]) -> [f64; 3] {
    ode_rhs(model, &State::from_array(*v))
}

fn axpy(a: f64, x: &[f64; 3], y: &[f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| y[i] + a * x[i])
}

fn rk4_step(model: &CrispModel, v: &[f64; 3], h: f64) -> [f64; 3] {
    let k1 = rhs(model, v);
    let k2 = rhs(model, &axpy(0.5 * h, &k1, v));
    let k3 = rhs(model, &axpy(0.5 * h, &k2, v));
    let k4 = rhs(model, &axpy(h, &k3, v));
    std::array::from_fn(|i| v[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Classical fixed-step RK4 on the deterministic system. Noise and jumps in
/// `model` are ignored; the jump log of the result is empty. Zero initial
/// prey or predator is allowed and stays zero.
pub fn simulate_ode(model: &CrispModel, config: &SimConfig) -> Result<Trajectory> {
    config.check_ode()?;
    model.check()?;

    let mut rec = Recorder::new(config);
    let mut v = config.initial.to_array();
    for step in 1..=config.n_steps() {
        let t_next = config.grid_time(step);
        let h = t_next - rec.time();
        v = rk4_step(model, &v, h);
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                time: t_next,
                detail: format!("state {v:?}"),
            });
        }
        rec.advance(t_next, v);
        let logs = v.map(f64::ln);
        rec.flag_extinction(&logs);
        if config.is_recorded(step) {
            rec.record(&logs);
        }
    }
    let mut traj = rec.finish();
    traj.fine_steps = config.n_steps();
    Ok(traj)
}
