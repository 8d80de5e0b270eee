//! Fixed-step integration of the chemostat.
//!
//! [`simulate`] integrates the jump-diffusion in log coordinates on a
//! jump-adapted grid, so every state stays strictly positive. [`simulate_ode`]
//! runs classical RK4 on the deterministic system. Both produce a
//! [`Trajectory`] whose running time averages are accumulated by trapezoid on
//! the fine grid, independent of the output stride.

mod jumps;
mod ode;
mod recorder;
mod sde;

use serde::Serialize;

pub use jumps::{sample_jumps, JumpEvent};
pub use ode::simulate_ode;
pub use sde::{log_drift, log_increment, simulate, simulate_path, LogNoise};

use crate::error::{Error, Result};
use crate::model::{CrispModel, State};

/// Log-coordinates below this are clamped and the coordinate is flagged
/// numerically extinct (`exp(-700)` is about `1e-304`).
pub const LOG_FLOOR: f64 = -700.0;

/// Log-coordinates above this are treated as overflow and abort the run.
pub const LOG_CEILING: f64 = 700.0;

pub const DEFAULT_EXTINCTION_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Scheme {
    /// Euler-Maruyama on `(ln S, ln x, ln y)`; positive by construction.
    #[default]
    LogEuler,
    /// Euler-Maruyama on `(S, x, y)` directly. Diagnostic only: it can step
    /// through zero and then fails with [`Error::PositivityLost`].
    DirectEuler,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub initial: State,
    pub t_end: f64,
    pub dt: f64,
    pub seed: u64,
    /// Record every n-th point of the uniform grid (the final time is always
    /// recorded).
    pub output_stride: usize,
    pub scheme: Scheme,
    /// Concentration below which a path is flagged extinct in that
    /// coordinate. The flag is sticky.
    pub extinction_threshold: f64,
}

impl SimConfig {
    pub fn new(initial: State, t_end: f64, dt: f64, seed: u64) -> Self {
        Self {
            initial,
            t_end,
            dt,
            seed,
            output_stride: 1,
            scheme: Scheme::LogEuler,
            extinction_threshold: DEFAULT_EXTINCTION_THRESHOLD,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.output_stride = stride;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    /// Number of steps of the uniform grid; the last one may be short.
    pub fn n_steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    /// Time of uniform grid node `n`.
    pub fn grid_time(&self, n: usize) -> f64 {
        if n >= self.n_steps() {
            self.t_end
        } else {
            n as f64 * self.dt
        }
    }

    fn is_recorded(&self, n: usize) -> bool {
        n % self.output_stride == 0 || n == self.n_steps()
    }

    fn check_common(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.dt > 0.0 && self.dt < self.t_end) {
            return Err(Error::InvalidConfig(format!(
                "dt must satisfy 0 < dt < t_end, got dt = {} with t_end = {}",
                self.dt, self.t_end
            )));
        }
        if self.output_stride == 0 {
            return Err(Error::InvalidConfig("output_stride must be at least 1".into()));
        }
        if !(self.extinction_threshold > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "extinction_threshold must be positive, got {}",
                self.extinction_threshold
            )));
        }
        if !self.initial.is_finite() {
            return Err(Error::InvalidConfig("initial state must be finite".into()));
        }
        Ok(())
    }

    /// Validation for the stochastic integrator: strictly positive start.
    pub fn check(&self) -> Result<()> {
        self.check_common()?;
        if !self.initial.is_strictly_positive() {
            return Err(Error::InvalidConfig(format!(
                "initial state must be strictly positive, got {:?}",
                self.initial
            )));
        }
        Ok(())
    }

    /// Validation for the deterministic solver, which also accepts zeros.
    pub fn check_ode(&self) -> Result<()> {
        self.check_common()?;
        let s = self.initial;
        if !(s.s >= 0.0 && s.x >= 0.0 && s.y >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "initial state must be nonnegative, got {s:?}"
            )));
        }
        Ok(())
    }
}

/// Terminal values of the martingale terms in the log and budget dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MartingaleTerms {
    /// `M_i(T) = sigma_i B_i(T)`.
    pub brownian: [f64; 3],
    /// `M~_i(T) = sum over jumps of ln(1 + gamma_i) - T sum_k ln(1 + gamma_i(u_k)) lambda_k`.
    pub jump: [f64; 3],
    /// Ito integrals `int_0^T S dB_1`, `int_0^T x dB_2`, `int_0^T y dB_3`.
    pub state_ito: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    /// Running averages `<S>_t, <x>_t, <y>_t`; at `t = 0` the initial state.
    pub means: Vec<[f64; 3]>,
    /// `ln x(t)/t` and `ln y(t)/t`; NaN at `t = 0`.
    pub log_ratios: Vec<[f64; 2]>,
    pub jumps: Vec<JumpEvent>,
    pub martingales: MartingaleTerms,
    /// First time each log-coordinate was clamped at [`LOG_FLOOR`].
    pub floored_at: [Option<f64>; 3],
    /// First time each coordinate fell below the extinction threshold.
    pub extinct_at: [Option<f64>; 3],
    /// Number of fine-grid steps taken, jump substeps included.
    pub fine_steps: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn terminal_state(&self) -> State {
        self.states.last().copied().unwrap_or_default()
    }

    /// Terminal `ln x(t)/t` (`coordinate = 0`) or `ln y(t)/t` (`1`), frozen
    /// at the flag time if the coordinate hit the log floor.
    pub fn lyapunov_statistic(&self, coordinate: usize) -> f64 {
        match self.floored_at[coordinate + 1] {
            Some(t) if t > 0.0 => LOG_FLOOR / t,
            _ => self.log_ratios.last().map_or(f64::NAN, |r| r[coordinate]),
        }
    }

    /// Whether the coordinate was flagged extinct at or before `t`.
    pub fn extinct_by(&self, coordinate: usize, t: f64) -> bool {
        self.extinct_at[coordinate].is_some_and(|at| at <= t)
    }
}

/// Budget residual `phi(t) = <S>_t - S0 + <x>_t/delta1 + <y>_t/(delta1 delta2)`
/// at every recorded time.
pub fn conservation_residual(traj: &Trajectory, model: &CrispModel) -> Vec<f64> {
    traj.means
        .iter()
        .map(|m| residual(model, m))
        .collect()
}

pub(crate) fn residual(model: &CrispModel, means: &[f64; 3]) -> f64 {
    means[0] - model.s0 + means[1] / model.delta1 + means[2] / (model.delta1 * model.delta2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_t_end_exactly() {
        let c = SimConfig::new(State::new(1.0, 1.0, 1.0), 1.0, 0.3, 0);
        assert_eq!(c.n_steps(), 4);
        assert_eq!(c.grid_time(3), 0.8999999999999999);
        assert_eq!(c.grid_time(4), 1.0);

        let c = SimConfig::new(State::new(1.0, 1.0, 1.0), 50.0, 1e-3, 0);
        assert_eq!(c.n_steps(), 50_000);
    }

    #[test]
    fn config_validation() {
        let good = SimConfig::new(State::new(1.0, 1.0, 1.0), 10.0, 0.1, 0);
        assert!(good.check().is_ok());
        assert!(SimConfig { dt: 10.0, ..good.clone() }.check().is_err());
        assert!(SimConfig { dt: -0.1, ..good.clone() }.check().is_err());
        assert!(SimConfig { t_end: f64::INFINITY, ..good.clone() }.check().is_err());
        assert!(SimConfig { output_stride: 0, ..good.clone() }.check().is_err());
        let zero_prey = SimConfig {
            initial: State::new(1.0, 0.0, 1.0),
            ..good.clone()
        };
        assert!(zero_prey.check().is_err());
        assert!(zero_prey.check_ode().is_ok());
        let negative = SimConfig {
            initial: State::new(1.0, -1.0, 1.0),
            ..good
        };
        assert!(negative.check_ode().is_err());
    }
}
