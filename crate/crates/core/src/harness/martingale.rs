use serde::Serialize;

use crate::integrator::MartingaleTerms;
use crate::model::{Compartment, CrispModel};

/// Cross-path statistics of `M_i(T)/T` and `M~_i(T)/T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MartingaleDiagnostics {
    pub n_paths: usize,
    pub horizon: f64,
    pub brownian_mean: [f64; 3],
    pub brownian_abs_mean: [f64; 3],
    pub jump_mean: [f64; 3],
    pub jump_abs_mean: [f64; 3],
}

/// Per-path terminal values `M_i(T)/T` and `M~_i(T)/T`.
pub fn scaled_terms(terms: &[MartingaleTerms], horizon: f64) -> Vec<([f64; 3], [f64; 3])> {
    terms
        .iter()
        .map(|m| (m.brownian.map(|v| v / horizon), m.jump.map(|v| v / horizon)))
        .collect()
}

pub fn martingale_diagnostics(terms: &[MartingaleTerms], horizon: f64) -> MartingaleDiagnostics {
    let n = terms.len() as f64;
    let scaled = scaled_terms(terms, horizon);
    let avg = |jump: bool, abs: bool, i: usize| {
        let pick = |s: &([f64; 3], [f64; 3])| {
            let v = if jump { s.1[i] } else { s.0[i] };
            if abs { v.abs() } else { v }
        };
        scaled.iter().map(pick).sum::<f64>() / n
    };
    MartingaleDiagnostics {
        n_paths: terms.len(),
        horizon,
        brownian_mean: std::array::from_fn(|i| avg(false, false, i)),
        brownian_abs_mean: std::array::from_fn(|i| avg(false, true, i)),
        jump_mean: std::array::from_fn(|i| avg(true, false, i)),
        jump_abs_mean: std::array::from_fn(|i| avg(true, true, i)),
    }
}

/// Standard errors of the cross-path means of `M_i(T)/T` and `M~_i(T)/T`.
///
/// `M_i(T) = sigma_i B_i(T)` has variance `sigma_i^2 T`; the compensated
/// compound Poisson sum `M~_i(T)` has variance `T sum_k ln^2(1 + gamma_i) lambda_k`.
pub fn analytic_standard_errors(model: &CrispModel, horizon: f64, n_paths: usize) -> ([f64; 3], [f64; 3]) {
    let scale = (horizon * n_paths as f64).sqrt();
    let brownian = model.sigmas().map(|s| s / scale);
    let jump = Compartment::ALL.map(|c| model.jumps.log_second_moment(c).sqrt() / scale);
    (brownian, jump)
}

impl MartingaleDiagnostics {
    /// Whether every cross-path mean lies within `k` standard errors of zero.
    /// A zero standard error demands an exact zero.
    pub fn within(&self, se: &([f64; 3], [f64; 3]), k: f64) -> bool {
        (0..3).all(|i| {
            self.brownian_mean[i].abs() <= k * se.0[i] && self.jump_mean[i].abs() <= k * se.1[i]
        })
    }
}
