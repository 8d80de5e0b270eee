use super::{SimConfig, Trajectory};
use crate::model::State;

/// Accumulates time integrals on the fine grid and writes strided records.
pub(super) struct Recorder {
    traj: Trajectory,
    integral: [f64; 3],
    t: f64,
    state: [f64; 3],
    extinct_log: f64,
}

impl Recorder {
    pub fn new(config: &SimConfig) -> Self {
        let n_records = config.n_steps() / config.output_stride + 2;
        let traj = Trajectory {
            times: Vec::with_capacity(n_records),
            states: Vec::with_capacity(n_records),
            means: Vec::with_capacity(n_records),
            log_ratios: Vec::with_capacity(n_records),
            ..Default::default()
        };
        let initial = config.initial.to_array();
        let mut rec = Self {
            traj,
            integral: [0.0; 3],
            t: 0.0,
            state: initial,
            extinct_log: config.extinction_threshold.ln(),
        };
        let logs = initial.map(f64::ln);
        rec.flag_extinction(&logs);
        rec.record(&logs);
        rec
    }

    /// Trapezoid from the current time to `t`, where `left_limit` is the
    /// state just before `t` (before any jump at `t`).
    pub fn advance(&mut self, t: f64, left_limit: [f64; 3]) {
        let h = t - self.t;
        for ((acc, a), b) in self.integral.iter_mut().zip(self.state).zip(left_limit) {
            *acc += 0.5 * h * (a + b);
        }
        self.t = t;
        self.state = left_limit;
    }

    /// Replaces the current state (after a jump) without advancing time.
    pub fn set_state(&mut self, state: [f64; 3]) {
        self.state = state;
    }

    pub fn flag_extinction(&mut self, logs: &[f64; 3]) {
        for (at, &l) in self.traj.extinct_at.iter_mut().zip(logs) {
            if at.is_none() && l < self.extinct_log {
                *at = Some(self.t);
            }
        }
    }

    pub fn flag_floor(&mut self, i: usize) {
        self.traj.floored_at[i].get_or_insert(self.t);
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Records the current state; `logs` are its log-coordinates.
    pub fn record(&mut self, logs: &[f64; 3]) {
        let t = self.t;
        let means = if t > 0.0 {
            self.integral.map(|v| v / t)
        } else {
            self.state
        };
        let ratios = if t > 0.0 {
            [logs[1] / t, logs[2] / t]
        } else {
            [f64::NAN; 2]
        };
        self.traj.times.push(t);
        self.traj.states.push(State::from_array(self.state));
        self.traj.means.push(means);
        self.traj.log_ratios.push(ratios);
    }

    pub fn trajectory_mut(&mut self) -> &mut Trajectory {
        &mut self.traj
    }

    pub fn finish(self) -> Trajectory {
        self.traj
    }
}
