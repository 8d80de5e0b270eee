use std::fmt;

use serde::{Deserialize, Serialize};

use super::ensemble::EnsembleSummary;
use super::stats::{median, percentile};
use crate::error::{Error, Result};
use crate::thresholds::{Regime, ThresholdReport};

/// Finite-horizon tolerances for the asymptotic claims.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyTolerances {
    /// Absolute slack on Lyapunov-rate bounds.
    pub rate: f64,
    /// Relative slack on time-average limits and bounds.
    pub mean_rel: f64,
    pub min_horizon: f64,
    /// Fraction of the horizon discarded before time averages are taken.
    pub burn_in: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            rate: 0.02,
            mean_rel: 0.05,
            min_horizon: 500.0,
            burn_in: 0.5,
        }
    }
}

impl VerifyTolerances {
    fn check(&self) -> Result<()> {
        let ok = self.rate >= 0.0
            && self.mean_rel >= 0.0
            && self.min_horizon >= 0.0
            && (0.0..1.0).contains(&self.burn_in);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid tolerances {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClaimKind {
    /// `empirical <= predicted + tolerance`.
    UpperBound,
    /// `empirical >= predicted - tolerance`.
    LowerBound,
    /// `|empirical - predicted| <= tolerance`.
    Limit,
}

impl ClaimKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::UpperBound => "upper",
            Self::LowerBound => "lower",
            Self::Limit => "limit",
        }
    }

    fn holds(self, predicted: f64, empirical: f64, tolerance: f64) -> bool {
        match self {
            Self::UpperBound => empirical <= predicted + tolerance,
            Self::LowerBound => empirical >= predicted - tolerance,
            Self::Limit => (empirical - predicted).abs() <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub id: &'static str,
    /// How the empirical statistic was formed.
    pub statistic: &'static str,
    pub predicted: f64,
    pub empirical: f64,
    /// Absolute tolerance actually applied.
    pub tolerance: f64,
    pub kind: ClaimKind,
    pub passed: bool,
}

impl Claim {
    fn new(
        id: &'static str,
        statistic: &'static str,
        kind: ClaimKind,
        predicted: f64,
        empirical: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            id,
            statistic,
            predicted,
            empirical,
            tolerance,
            kind,
            passed: kind.holds(predicted, empirical, tolerance),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub regime: Regime,
    pub horizon: f64,
    pub n_paths: usize,
    pub burn_in_time: f64,
    pub claims: Vec<Claim>,
}

impl Verdict {
    /// True when every claim passed. A verdict with no claims (boundary
    /// regime) passes vacuously.
    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.passed)
    }

    pub fn claim(&self, id: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.id == id)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "regime {}  horizon {}  paths {}  burn-in {}",
            self.regime, self.horizon, self.n_paths, self.burn_in_time
        )?;
        writeln!(
            f,
            "{:<16} {:<22} {:>6} {:>14} {:>14} {:>12}  result",
            "claim", "statistic", "kind", "predicted", "empirical", "tolerance"
        )?;
        for c in &self.claims {
            writeln!(
                f,
                "{:<16} {:<22} {:>6} {:>14.8} {:>14.8} {:>12.6}  {}",
                c.id,
                c.statistic,
                c.kind.as_str(),
                c.predicted,
                c.empirical,
                c.tolerance,
                if c.passed { "PASS" } else { "FAIL" }
            )?;
        }
        write!(f, "overall: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Per-path time averages over the window `[t_b, T]`, where `t_b` is the
/// first recorded time at or after `burn_in * T`:
/// `(T <f>_T - t_b <f>_{t_b}) / (T - t_b)`. With no burn-in this is `<f>_T`.
pub fn tail_means(summary: &EnsembleSummary, burn_in: f64) -> Vec<[f64; 3]> {
    let horizon = summary.horizon;
    let k = summary
        .times
        .iter()
        .position(|&t| t >= burn_in * horizon)
        .unwrap_or(summary.times.len() - 1);
    let tb = summary.times[k];
    summary
        .paths
        .iter()
        .map(|p| {
            let end = p.terminal_means();
            if tb <= 0.0 || tb >= horizon {
                return end;
            }
            let start = p.means[k];
            std::array::from_fn(|i| (horizon * end[i] - tb * start[i]) / (horizon - tb))
        })
        .collect()
}

/// Checks each prediction in `report` against the ensemble.
///
/// Rate bounds use the median of the per-path terminal `ln x/t`, `ln y/t`
/// statistics. Mean limits use the median of the per-path tail averages,
/// and the predator lower bound uses their 5th percentile.
pub fn verify(report: &ThresholdReport, summary: &EnsembleSummary, tol: &VerifyTolerances) -> Result<Verdict> {
    tol.check()?;
    if !(summary.horizon >= tol.min_horizon) {
        return Err(Error::HorizonTooShort {
            horizon: summary.horizon,
            min_horizon: tol.min_horizon,
        });
    }
    if summary.paths.is_empty() {
        return Err(Error::InvalidConfig("ensemble has no completed paths".into()));
    }

    let lyap = |i: usize| median(&summary.paths.iter().map(|p| p.lyapunov[i]).collect::<Vec<_>>());
    let tails = tail_means(summary, tol.burn_in);
    let column = |i: usize| tails.iter().map(|m| m[i]).collect::<Vec<_>>();
    let rel = |v: f64| tol.mean_rel * v.abs();

    let p = &report.predictions;
    let mut claims = Vec::with_capacity(p.count());
    if let Some(b) = p.x_lyapunov_bound {
        claims.push(Claim::new("x_rate", "median ln x(T)/T", ClaimKind::UpperBound, b, lyap(0), tol.rate));
    }
    if let Some(b) = p.y_lyapunov_bound {
        claims.push(Claim::new("y_rate", "median ln y(T)/T", ClaimKind::UpperBound, b, lyap(1), tol.rate));
    }
    if let Some(v) = p.s_mean_limit {
        claims.push(Claim::new("S_mean", "median tail <S>", ClaimKind::Limit, v, median(&column(0)), rel(v)));
    }
    if let Some(v) = p.x_mean_limit {
        claims.push(Claim::new("x_mean", "median tail <x>", ClaimKind::Limit, v, median(&column(1)), rel(v)));
    }
    if let Some(v) = p.y_mean_lower_bound {
        claims.push(Claim::new(
            "y_mean_lower",
            "p5 tail <y>",
            ClaimKind::LowerBound,
            v,
            percentile(&column(2), 5.0),
            rel(v),
        ));
    }

    let k = summary
        .times
        .iter()
        .position(|&t| t >= tol.burn_in * summary.horizon)
        .unwrap_or(0);
    Ok(Verdict {
        regime: report.regime,
        horizon: summary.horizon,
        n_paths: summary.n_paths,
        burn_in_time: summary.times[k],
        claims,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::ensemble::ensemble;
    use crate::integrator::SimConfig;
    use crate::model::fixtures::persistence_set;
    use crate::model::State;
    use crate::thresholds::{classify, DEFAULT_BOUNDARY_TOL};

    #[test]
    fn claim_kinds() {
        assert!(ClaimKind::UpperBound.holds(-0.1, -0.09, 0.02));
        assert!(!ClaimKind::UpperBound.holds(-0.1, -0.07, 0.02));
        assert!(ClaimKind::LowerBound.holds(1.0, 0.96, 0.05));
        assert!(!ClaimKind::LowerBound.holds(1.0, 0.9, 0.05));
        assert!(ClaimKind::Limit.holds(1.0, 1.04, 0.05));
        assert!(!ClaimKind::Limit.holds(1.0, 0.94, 0.05));
        assert!(!ClaimKind::Limit.holds(1.0, f64::NAN, 0.05));
    }

    #[test]
    fn short_horizon_is_refused() {
        let m = persistence_set();
        let c = SimConfig::new(State::new(1.0, 0.5, 0.5), 20.0, 0.05, 1);
        let s = ensemble(&m, &c, 2).unwrap();
        let r = classify(&m, DEFAULT_BOUNDARY_TOL);
        let err = verify(&r, &s, &VerifyTolerances::default()).unwrap_err();
        assert!(matches!(err, Error::HorizonTooShort { .. }));
    }

    #[test]
    fn zero_noise_persistence_meets_the_bound() {
        let mut m = persistence_set();
        m.sigma1 = 0.0;
        m.sigma2 = 0.0;
        m.sigma3 = 0.0;
        let c = SimConfig::new(State::new(4.0, 0.5, 0.5), 600.0, 0.01, 3).with_stride(100);
        let s = ensemble(&m, &c, 1).unwrap();
        let r = classify(&m, DEFAULT_BOUNDARY_TOL);
        assert_eq!(r.regime, Regime::Persistent);
        let v = verify(&r, &s, &VerifyTolerances::default()).unwrap();
        assert_eq!(v.claims.len(), r.predictions.count());
        let c = v.claim("y_mean_lower").unwrap();
        // Without noise the bound is the coexistence equilibrium itself.
        assert!((c.empirical - c.predicted).abs() < 1e-3 * c.predicted, "{v}");
        assert!(v.passed());
    }

    #[test]
    fn tail_window_without_burn_in_is_terminal_mean() {
        let m = persistence_set();
        let c = SimConfig::new(State::new(1.0, 0.5, 0.5), 10.0, 0.01, 1).with_stride(100);
        let s = ensemble(&m, &c, 3).unwrap();
        let t0 = tail_means(&s, 0.0);
        for (p, t) in s.paths.iter().zip(&t0) {
            assert_eq!(p.terminal_means(), *t);
        }
        // Whole-window average decomposes into head and tail pieces.
        let tail = tail_means(&s, 0.5);
        for (p, t) in s.paths.iter().zip(&tail) {
            let head = p.means[5];
            let whole = p.terminal_means();
            for i in 0..3 {
                assert!((0.5 * head[i] + 0.5 * t[i] - whole[i]).abs() < 1e-12);
            }
        }
    }
}
