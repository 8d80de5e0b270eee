//! Monte Carlo ensembles and their comparison with the threshold oracles.
//!
//! Paths run in parallel on independent random streams and are always
//! aggregated in path-index order, so every result is independent of the
//! number of worker threads.

mod ensemble;
mod martingale;
mod stats;
mod sweep;
mod verify;

pub use ensemble::{
    ensemble, ensemble_with, EnsembleOptions, EnsembleSummary, PathFailure, PathSummary, QUANTITIES,
};
pub use martingale::{analytic_standard_errors, martingale_diagnostics, scaled_terms, MartingaleDiagnostics};
pub use stats::{mean, median, percentile, percentile_sorted, Band};
pub use sweep::{p_sweep, SweepOptions, SweepRow, TerminalStats};
pub use verify::{tail_means, verify, Claim, ClaimKind, Verdict, VerifyTolerances};
