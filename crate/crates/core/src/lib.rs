//! Imprecise stochastic food-chain chemostat with Lévy jumps.
//!
//! Interval-valued parameters are crispified into a one-parameter family of
//! models ([`model`]); each member has closed-form invasion thresholds
//! ([`thresholds`]), can be integrated path by path ([`integrator`]), and its
//! long-run behaviour can be checked against the thresholds by Monte Carlo
//! ([`harness`]).

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod integrator;
pub mod interval;
pub mod io;
pub mod model;
pub mod thresholds;

pub use error::{Error, Result};
pub use harness::{
    ensemble, ensemble_with, p_sweep, verify, EnsembleOptions, EnsembleSummary, SweepOptions, SweepRow, Verdict,
    VerifyTolerances,
};
pub use integrator::{simulate, simulate_ode, simulate_path, Scheme, SimConfig, Trajectory};
pub use interval::IntervalNumber;
pub use model::{
    check_h3, crispify, validate, Compartment, CrispModel, ImpreciseModel, JumpMark, JumpSpec, State,
    ValidationReport,
};
pub use thresholds::{classify, Regime, ThresholdReport, DEFAULT_BOUNDARY_TOL};
