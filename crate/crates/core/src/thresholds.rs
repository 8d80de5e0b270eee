//! Noise-corrected growth penalties `beta_i`, the invasion thresholds
//! `R0s` and `R1s`, and the long-run behaviour they predict.
//!
//! The predictions attached to a [`ThresholdReport`] are the oracles the
//! Monte Carlo harness checks ensembles against.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Compartment, CrispModel};

/// Default guard band around `R = 1` used by [`classify`].
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    /// `R0s < 1`: prey and predator die out exponentially.
    BothExtinct,
    /// `R1s < 1 < R0s`: prey persists, predator dies out.
    PreyOnlyPersists,
    /// `R1s > 1`: predator persists in the mean.
    Persistent,
    /// Within the tolerance band of a threshold; no prediction is made.
    Boundary,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::BothExtinct => "BothExtinct",
            Self::PreyOnlyPersists => "PreyOnlyPersists",
            Self::Persistent => "Persistent",
            Self::Boundary => "Boundary",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Limits and bounds predicted for the classified regime. Fields that do not
/// apply to the regime are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PredictedAsymptotics {
    /// Upper bound on `limsup ln x(t)/t`.
    pub x_lyapunov_bound: Option<f64>,
    /// Upper bound on `limsup ln y(t)/t`.
    pub y_lyapunov_bound: Option<f64>,
    /// `lim <S>_t`.
    pub s_mean_limit: Option<f64>,
    /// `lim <x>_t`.
    pub x_mean_limit: Option<f64>,
    /// Lower bound on `liminf <y>_t`.
    pub y_mean_lower_bound: Option<f64>,
}

impl PredictedAsymptotics {
    /// Number of populated prediction fields.
    pub fn count(&self) -> usize {
        [
            self.x_lyapunov_bound,
            self.y_lyapunov_bound,
            self.s_mean_limit,
            self.x_mean_limit,
            self.y_mean_lower_bound,
        ]
        .iter()
        .filter(|v| v.is_some())
        .count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub beta: [f64; 3],
    #[serde(rename = "R0s")]
    pub r0s: f64,
    #[serde(rename = "R1s")]
    pub r1s: f64,
    pub regime: Regime,
    pub boundary_tol: f64,
    pub predictions: PredictedAsymptotics,
}

/// `beta_i = sigma_i^2 / 2 + sum_k [gamma_i(u_k) - ln(1 + gamma_i(u_k))] lambda_k`.
pub fn beta(model: &CrispModel, c: Compartment) -> f64 {
    let s = model.sigma(c);
    0.5 * s * s + model.jumps.jump_penalty(c)
}

/// [`beta`] by 1-based compartment number.
pub fn beta_i(model: &CrispModel, i: usize) -> Result<f64> {
    Ok(beta(model, Compartment::from_number(i)?))
}

/// `R0s = S0 m1 / (D + beta_2)`.
pub fn r0s(model: &CrispModel) -> Result<f64> {
    let denom = model.d + beta(model, Compartment::Prey);
    if !(denom > 0.0) {
        return Err(Error::Domain(format!("R0s denominator D + beta2 = {denom} is not positive")));
    }
    Ok(model.s0 * model.m1 / denom)
}

/// `R1s = S0 m1 m2 delta1 / (m2 delta1 (D + beta_2) + m1 (D + beta_3))`.
pub fn r1s(model: &CrispModel) -> Result<f64> {
    let denom = r1s_denominator(model);
    if !(denom > 0.0) {
        return Err(Error::Domain(format!("R1s denominator {denom} is not positive")));
    }
    Ok(model.s0 * model.m1 * model.m2 * model.delta1 / denom)
}

fn r1s_denominator(model: &CrispModel) -> f64 {
    let b2 = beta(model, Compartment::Prey);
    let b3 = beta(model, Compartment::Predator);
    model.m2 * model.delta1 * (model.d + b2) + model.m1 * (model.d + b3)
}

/// `m2 delta1 (D + beta_2)/m1 + D + beta_3`, the rate multiplying
/// `R1s - 1` in the predator bounds.
pub fn predator_rate_factor(model: &CrispModel) -> f64 {
    r1s_denominator(model) / model.m1
}

/// Classifies the regime and attaches the predicted asymptotics.
///
/// Threshold values that cannot be computed (nonpositive denominators)
/// become NaN and classify as [`Regime::Boundary`].
pub fn classify(model: &CrispModel, boundary_tol: f64) -> ThresholdReport {
    let beta = Compartment::ALL.map(|c| beta(model, c));
    let r0 = r0s(model).unwrap_or(f64::NAN);
    let r1 = r1s(model).unwrap_or(f64::NAN);
    let (d, b2, b3) = (model.d, beta[1], beta[2]);

    let regime = if r0 < 1.0 - boundary_tol {
        Regime::BothExtinct
    } else if r1 < 1.0 - boundary_tol && r0 > 1.0 + boundary_tol {
        Regime::PreyOnlyPersists
    } else if r1 > 1.0 + boundary_tol {
        Regime::Persistent
    } else {
        Regime::Boundary
    };

    let predictions = match regime {
        Regime::BothExtinct => PredictedAsymptotics {
            x_lyapunov_bound: Some((d + b2) * (r0 - 1.0)),
            y_lyapunov_bound: Some(-(d + b3)),
            s_mean_limit: Some(model.s0),
            ..Default::default()
        },
        Regime::PreyOnlyPersists => PredictedAsymptotics {
            y_lyapunov_bound: Some(predator_rate_factor(model) * (r1 - 1.0)),
            s_mean_limit: Some((d + b2) / model.m1),
            x_mean_limit: Some(model.delta1 / model.m1 * (d + b2) * (r0 - 1.0)),
            ..Default::default()
        },
        Regime::Persistent => {
            let (m1, m2) = (model.m1, model.m2);
            let lead = m1 * model.delta2 / (m1 * m2 + m2 * m2 * model.delta1);
            PredictedAsymptotics {
                y_mean_lower_bound: Some(lead * predator_rate_factor(model) * (r1 - 1.0)),
                ..Default::default()
            }
        }
        Regime::Boundary => PredictedAsymptotics::default(),
    };

    ThresholdReport {
        beta,
        r0s: r0,
        r1s: r1,
        regime,
        boundary_tol,
        predictions,
    }
}

impl fmt::Display for ThresholdReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |f: &mut fmt::Formatter<'_>, name: &str, v: f64| writeln!(f, "  {name:<20} {v:>16.10}");
        writeln!(f, "thresholds")?;
        row(f, "beta1", self.beta[0])?;
        row(f, "beta2", self.beta[1])?;
        row(f, "beta3", self.beta[2])?;
        row(f, "R0s", self.r0s)?;
        row(f, "R1s", self.r1s)?;
        writeln!(f, "  {:<20} {:>16}", "regime", self.regime.as_str())?;
        let p = &self.predictions;
        let optional = [
            ("x_lyapunov_bound", p.x_lyapunov_bound),
            ("y_lyapunov_bound", p.y_lyapunov_bound),
            ("S_mean_limit", p.s_mean_limit),
            ("x_mean_limit", p.x_mean_limit),
            ("y_mean_lower_bound", p.y_mean_lower_bound),
        ];
        for (name, v) in optional {
            if let Some(v) = v {
                row(f, name, v)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::model::fixtures::{extinction_set, persistence_set};
    use crate::model::{JumpMark, JumpSpec};

    // Expected values below were computed with 30-digit mpmath before the
    // implementation existed.

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn beta_examples() {
        let mut m = persistence_set();
        m.sigma2 = 0.0;
        assert_eq!(beta(&m, Compartment::Prey), 0.0);

        m.sigma2 = 0.2;
        m.jumps = JumpSpec::new(vec![JumpMark::new(1.0, [0.0, 0.5, 0.0])]);
        assert!(rel(beta(&m, Compartment::Prey), 0.114_534_891_891_835_618) < 1e-14);

        m.jumps = JumpSpec::new(vec![JumpMark::new(1.0, [0.0, 0.0, 0.0])]);
        assert!(rel(beta(&m, Compartment::Prey), 0.02) < 1e-15);
        assert!(beta_i(&m, 0).is_err());
        assert_eq!(beta_i(&m, 2).unwrap(), beta(&m, Compartment::Prey));
    }

    #[test]
    fn r0s_examples() {
        assert!(rel(r0s(&extinction_set()).unwrap(), 0.792_079_207_920_792_079) < 1e-13);
        assert!(rel(r0s(&persistence_set()).unwrap(), 19.512_195_121_951_219_5) < 1e-13);

        let mut m = persistence_set();
        m.sigma2 = 0.0;
        assert_eq!(r0s(&m).unwrap(), m.s0 * m.m1 / m.d);
    }

    #[test]
    fn r1s_examples() {
        assert!(rel(r1s(&persistence_set()).unwrap(), 4.502_814_258_911_819_887) < 1e-13);
        assert!(rel(r1s(&extinction_set()).unwrap(), 0.216_021_602_160_216_021) < 1e-13);

        let mut m = persistence_set();
        m.m2 = 1e6;
        let (r0, r1) = (r0s(&m).unwrap(), r1s(&m).unwrap());
        assert!(r1 < r0);
        assert!(rel(r1, r0) < 5e-5, "{r1} vs {r0}");
        assert!(rel(r1, 19.512_156_097_639_024_234) < 1e-12);
    }

    #[test]
    fn nonpositive_denominator_is_a_domain_error() {
        let mut m = persistence_set();
        m.d = -1.0;
        assert!(r0s(&m).is_err());
        assert!(r1s(&m).is_err());
        assert_eq!(classify(&m, DEFAULT_BOUNDARY_TOL).regime, Regime::Boundary);
    }

    #[test]
    fn classify_extinction_set() {
        let r = classify(&extinction_set(), DEFAULT_BOUNDARY_TOL);
        assert_eq!(r.regime, Regime::BothExtinct);
        let p = r.predictions;
        assert!((p.x_lyapunov_bound.unwrap() + 0.105).abs() < 1e-14);
        assert!((p.y_lyapunov_bound.unwrap() + 0.505).abs() < 1e-15);
        assert_eq!(p.s_mean_limit, Some(1.0));
        assert_eq!(p.x_mean_limit, None);
        assert_eq!(p.y_mean_lower_bound, None);
        assert_eq!(p.count(), 3);
    }

    #[test]
    fn classify_persistence_set() {
        let r = classify(&persistence_set(), DEFAULT_BOUNDARY_TOL);
        assert_eq!(r.regime, Regime::Persistent);
        let bound = r.predictions.y_mean_lower_bound.unwrap();
        assert!(rel(bound, 0.598_397_435_897_435_897) < 1e-13, "{bound}");
        assert_eq!(r.predictions.count(), 1);
    }

    #[test]
    fn classify_prey_only() {
        let mut m = persistence_set();
        m.m2 = 0.05;
        let r = classify(&m, DEFAULT_BOUNDARY_TOL);
        assert_eq!(r.regime, Regime::PreyOnlyPersists);
        assert!(rel(r.r1s, 0.475_907_198_096_371_207) < 1e-13);
        let p = r.predictions;
        assert!(rel(p.s_mean_limit.unwrap(), 0.205) < 1e-14);
        assert!(rel(p.x_mean_limit.unwrap(), 1.8975) < 1e-13);
        assert!(rel(p.y_lyapunov_bound.unwrap(), -0.110_125) < 1e-13);
        assert_eq!(p.count(), 3);
    }

    #[test]
    fn classify_boundary_at_r0_one() {
        let mut m = extinction_set();
        m.s0 = (m.d + beta(&m, Compartment::Prey)) / m.m1;
        let r = classify(&m, DEFAULT_BOUNDARY_TOL);
        assert!((r.r0s - 1.0).abs() < 1e-12);
        assert_eq!(r.regime, Regime::Boundary);
        assert_eq!(r.predictions.count(), 0);
    }

    #[test]
    fn jumps_raise_beta_and_lower_thresholds() {
        let base = persistence_set();
        let mut jumped = base.clone();
        jumped.jumps = JumpSpec::new(vec![JumpMark::uniform(0.5, -0.3), JumpMark::uniform(0.5, 0.5)]);
        assert!(rel(beta(&jumped, Compartment::Prey), 0.080_604_917_915_283_998) < 1e-13);
        assert!(rel(r0s(&jumped).unwrap(), 14.254_917_660_451_053_2) < 1e-13);
        assert!(rel(r1s(&jumped).unwrap(), 3.289_596_383_181_012_277) < 1e-13);
        assert!(r0s(&jumped).unwrap() < r0s(&base).unwrap());
    }

    #[test]
    fn report_display_lists_present_predictions_only() {
        let text = classify(&extinction_set(), DEFAULT_BOUNDARY_TOL).to_string();
        assert!(text.contains("BothExtinct"));
        assert!(text.contains("x_lyapunov_bound"));
        assert!(!text.contains("y_mean_lower_bound"));
    }
}
