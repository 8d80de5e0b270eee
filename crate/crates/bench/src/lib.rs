//! Parameter sets shared by the benchmarks.

use chemostat_core::{CrispModel, JumpMark, JumpSpec, SimConfig, State};

pub fn persistence_set() -> CrispModel {
    CrispModel {
        s0: 4.0,
        d: 0.2,
        m1: 1.0,
        delta1: 0.5,
        sigma1: 0.1,
        m2: 0.6,
        delta2: 0.5,
        sigma2: 0.1,
        sigma3: 0.1,
        jumps: JumpSpec::none(),
        p: 0.0,
    }
}

/// Persistence set with two marks of rate 0.5 and relative jumps -0.3, 0.5.
pub fn jump_persistence_set() -> CrispModel {
    CrispModel {
        jumps: JumpSpec::new(vec![JumpMark::uniform(0.5, -0.3), JumpMark::uniform(0.5, 0.5)]),
        ..persistence_set()
    }
}

pub fn config(t_end: f64, dt: f64) -> SimConfig {
    SimConfig::new(State::new(4.0, 0.5, 0.5), t_end, dt, 1).with_stride(100)
}
