use serde::Serialize;

use super::ensemble::{ensemble_with, EnsembleOptions};
use super::stats::Band;
use super::verify::{verify, Verdict, VerifyTolerances};
use crate::error::{Error, Result};
use crate::integrator::SimConfig;
use crate::model::{crispify, CrispModel, ImpreciseModel};
use crate::thresholds::{classify, ThresholdReport, DEFAULT_BOUNDARY_TOL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerminalStats {
    pub s: Band,
    pub x: Band,
    pub y: Band,
    pub extinct_fraction: [f64; 2],
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub model: Option<CrispModel>,
    pub report: Option<ThresholdReport>,
    pub terminal: Option<TerminalStats>,
    pub verdict: Option<Verdict>,
    /// First error met while evaluating this row; later stages are skipped.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    pub tolerances: VerifyTolerances,
    pub ensemble: EnsembleOptions,
}

/// Evaluates the crisp model at every `p` of the grid, in increasing order.
///
/// With `n_paths = 0` only thresholds are computed. Otherwise each row also
/// runs an ensemble with the same `config` (and seed) and, when the horizon
/// allows it, a verdict. A failing row records its error and the sweep
/// carries on.
pub fn p_sweep(
    model: &ImpreciseModel,
    p_grid: &[f64],
    config: &SimConfig,
    n_paths: usize,
    options: &SweepOptions,
) -> Result<Vec<SweepRow>> {
    if p_grid.is_empty() {
        return Err(Error::InvalidConfig("p grid is empty".into()));
    }
    if let Some(p) = p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain(format!("p = {p} is outside [0, 1]")));
    }
    let mut grid = p_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    Ok(grid.into_iter().map(|p| row(model, p, config, n_paths, options)).collect())
}

fn row(model: &ImpreciseModel, p: f64, config: &SimConfig, n_paths: usize, options: &SweepOptions) -> SweepRow {
    let mut row = SweepRow {
        p,
        model: None,
        report: None,
        terminal: None,
        verdict: None,
        error: None,
    };
    let crisp = match crispify(model, p).and_then(|m| m.check().map(|_| m)) {
        Ok(m) => m,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let report = classify(&crisp, DEFAULT_BOUNDARY_TOL);
    row.model = Some(crisp.clone());
    row.report = Some(report.clone());
    if n_paths == 0 {
        return row;
    }
    let summary = match ensemble_with(&crisp, config, n_paths, &options.ensemble) {
        Ok(s) => s,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let band = |q| summary.terminal_band(q).unwrap_or(Band::NAN);
    row.terminal = Some(TerminalStats {
        s: band("S"),
        x: band("x"),
        y: band("y"),
        extinct_fraction: summary.terminal_extinct_fraction(),
        failures: summary.failures.len(),
    });
    match verify(&report, &summary, &options.tolerances) {
        Ok(v) => row.verdict = Some(v),
        Err(Error::HorizonTooShort { .. }) => {}
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}
