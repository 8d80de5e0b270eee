//! The food-chain chemostat: nutrient `S`, prey `x`, predator `y`.
//!
//! An [`ImpreciseModel`] carries interval-valued rates; [`crispify`] picks
//! one member of the family at imprecision level `p`. The resulting
//! [`CrispModel`] supplies the drift shared by the stochastic system and its
//! deterministic counterpart.
//!
//! Noise is multiplicative in every coordinate (`sigma1*S dB1`,
//! `sigma2*x dB2`, `sigma3*y dB3`) and jumps multiply the state by
//! `1 + gamma_i(u_k)`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::IntervalNumber;

/// One mark `u_k` of the finite jump-mark space with its rate `lambda_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpMark {
    pub weight: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
}

impl JumpMark {
    pub fn new(weight: f64, gamma: [f64; 3]) -> Self {
        Self {
            weight,
            gamma1: gamma[0],
            gamma2: gamma[1],
            gamma3: gamma[2],
        }
    }

    /// Same relative jump for all three compartments.
    pub fn uniform(weight: f64, gamma: f64) -> Self {
        Self::new(weight, [gamma; 3])
    }

    pub fn gamma(&self, c: Compartment) -> f64 {
        match c {
            Compartment::Nutrient => self.gamma1,
            Compartment::Prey => self.gamma2,
            Compartment::Predator => self.gamma3,
        }
    }

    pub fn gammas(&self) -> [f64; 3] {
        [self.gamma1, self.gamma2, self.gamma3]
    }
}

/// Finite characteristic measure of the Poisson random measure: a weighted
/// list of marks. An empty list means no jumps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JumpSpec {
    pub marks: Vec<JumpMark>,
}

impl JumpSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(marks: Vec<JumpMark>) -> Self {
        Self { marks }
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    /// Total mass `Lambda = sum_k lambda_k`.
    pub fn total_rate(&self) -> f64 {
        self.marks.iter().map(|m| m.weight).sum()
    }

    fn sum_over(&self, c: Compartment, f: impl Fn(f64) -> f64) -> f64 {
        self.marks.iter().map(|m| f(m.gamma(c)) * m.weight).sum()
    }

    /// `sum_k gamma_i(u_k) lambda_k`, the drift compensator of the jump term.
    pub fn compensator(&self, c: Compartment) -> f64 {
        self.sum_over(c, |g| g)
    }

    /// `sum_k ln(1 + gamma_i(u_k)) lambda_k`, the compensator of the log jumps.
    pub fn log_compensator(&self, c: Compartment) -> f64 {
        self.sum_over(c, f64::ln_1p)
    }

    /// `sum_k [gamma_i - ln(1 + gamma_i)] lambda_k`, the jump part of `beta_i`.
    pub fn jump_penalty(&self, c: Compartment) -> f64 {
        self.sum_over(c, |g| g - g.ln_1p())
    }

    /// `sum_k [ln(1 + gamma_i)]^2 lambda_k`; the variance rate of the
    /// compensated log-jump martingale.
    pub fn log_second_moment(&self, c: Compartment) -> f64 {
        self.sum_over(c, |g| g.ln_1p().powi(2))
    }
}

/// The three state coordinates, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Compartment {
    Nutrient,
    Prey,
    Predator,
}

impl Compartment {
    pub const ALL: [Compartment; 3] = [Self::Nutrient, Self::Prey, Self::Predator];

    pub fn index(self) -> usize {
        match self {
            Self::Nutrient => 0,
            Self::Prey => 1,
            Self::Predator => 2,
        }
    }

    /// Maps the 1-based index used for `beta_1..beta_3`.
    pub fn from_number(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Self::Nutrient),
            2 => Ok(Self::Prey),
            3 => Ok(Self::Predator),
            _ => Err(Error::Domain(format!("compartment index must be 1, 2 or 3, got {i}"))),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Self::Nutrient => "S",
            Self::Prey => "x",
            Self::Predator => "y",
        }
    }
}

impl fmt::Display for Compartment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Chemostat with interval-valued rates, as read from a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpreciseModel {
    #[serde(rename = "S0")]
    pub s0: f64,
    #[serde(rename = "D")]
    pub d: IntervalNumber,
    pub m1: IntervalNumber,
    pub delta1: IntervalNumber,
    pub sigma1: IntervalNumber,
    pub m2: IntervalNumber,
    pub delta2: IntervalNumber,
    pub sigma2: IntervalNumber,
    pub sigma3: IntervalNumber,
    #[serde(default)]
    pub jumps: JumpSpec,
}

impl ImpreciseModel {
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    /// Every crisp parameter at its degenerate interval.
    pub fn from_crisp(model: &CrispModel) -> Self {
        let pt = IntervalNumber::point;
        Self {
            s0: model.s0,
            d: pt(model.d),
            m1: pt(model.m1),
            delta1: pt(model.delta1),
            sigma1: pt(model.sigma1),
            m2: pt(model.m2),
            delta2: pt(model.delta2),
            sigma2: pt(model.sigma2),
            sigma3: pt(model.sigma3),
            jumps: model.jumps.clone(),
        }
    }

    /// `(name, interval)` for the eight interval-valued fields.
    pub fn intervals(&self) -> [(&'static str, IntervalNumber); 8] {
        [
            ("D", self.d),
            ("m1", self.m1),
            ("delta1", self.delta1),
            ("sigma1", self.sigma1),
            ("m2", self.m2),
            ("delta2", self.delta2),
            ("sigma2", self.sigma2),
            ("sigma3", self.sigma3),
        ]
    }
}

/// A fully numeric member of the imprecise family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrispModel {
    #[serde(rename = "S0")]
    pub s0: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub m1: f64,
    pub delta1: f64,
    pub sigma1: f64,
    pub m2: f64,
    pub delta2: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    #[serde(default)]
    pub jumps: JumpSpec,
    /// Imprecision level this model was crispified at; 0 for hand-built models.
    #[serde(default)]
    pub p: f64,
}

impl CrispModel {
    pub fn sigma(&self, c: Compartment) -> f64 {
        match c {
            Compartment::Nutrient => self.sigma1,
            Compartment::Prey => self.sigma2,
            Compartment::Predator => self.sigma3,
        }
    }

    pub fn sigmas(&self) -> [f64; 3] {
        [self.sigma1, self.sigma2, self.sigma3]
    }

    /// Checks what simulation and threshold evaluation rely on: finite
    /// positive rates and yields, nonnegative volatilities, positive jump
    /// weights and `gamma > -1`.
    pub fn check(&self) -> Result<()> {
        let positive = [
            ("S0", self.s0),
            ("D", self.d),
            ("m1", self.m1),
            ("delta1", self.delta1),
            ("m2", self.m2),
            ("delta2", self.delta2),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidModel(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("sigma1", self.sigma1), ("sigma2", self.sigma2), ("sigma3", self.sigma3)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidModel(format!("{name} must be nonnegative, got {v}")));
            }
        }
        check_jumps(&self.jumps).map_err(Error::InvalidModel)
    }

    /// Budget combination `S + x/delta1 + y/(delta1*delta2)`.
    pub fn budget(&self, s: &State) -> f64 {
        s.s + s.x / self.delta1 + s.y / (self.delta1 * self.delta2)
    }
}

fn check_jumps(jumps: &JumpSpec) -> std::result::Result<(), String> {
    for (k, m) in jumps.marks.iter().enumerate() {
        if !(m.weight > 0.0 && m.weight.is_finite()) {
            return Err(format!("jump mark {k}: weight must be positive, got {}", m.weight));
        }
        for c in Compartment::ALL {
            let g = m.gamma(c);
            if !(g > -1.0 && g.is_finite()) {
                return Err(format!(
                    "jump mark {k}: gamma{} must exceed -1, got {g}",
                    c.index() + 1
                ));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    #[serde(rename = "S")]
    pub s: f64,
    pub x: f64,
    pub y: f64,
}

impl State {
    pub const fn new(s: f64, x: f64, y: f64) -> Self {
        Self { s, x, y }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.s, self.x, self.y]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn get(&self, c: Compartment) -> f64 {
        self.to_array()[c.index()]
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.s > 0.0 && self.x > 0.0 && self.y > 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.s.is_finite() && self.x.is_finite() && self.y.is_finite()
    }
}

/// Replaces every interval by `lower^(1-p) * upper^p`.
pub fn crispify(model: &ImpreciseModel, p: f64) -> Result<CrispModel> {
    if !(model.s0 > 0.0 && model.s0.is_finite()) {
        return Err(Error::InvalidModel(format!("S0 must be positive, got {}", model.s0)));
    }
    let at = |name: &str, iv: IntervalNumber| {
        iv.value_at(p)
            .map_err(|e| Error::Domain(format!("{name}: {e}")))
    };
    Ok(CrispModel {
        s0: model.s0,
        d: at("D", model.d)?,
        m1: at("m1", model.m1)?,
        delta1: at("delta1", model.delta1)?,
        sigma1: at("sigma1", model.sigma1)?,
        m2: at("m2", model.m2)?,
        delta2: at("delta2", model.delta2)?,
        sigma2: at("sigma2", model.sigma2)?,
        sigma3: at("sigma3", model.sigma3)?,
        jumps: model.jumps.clone(),
        p,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`validate`]. Failures are entries, never errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    /// Smallest `c` with `sum_k [ln(1+gamma_i)]^2 lambda_k <= c` for all `i`.
    pub c: f64,
    /// `K_i = max_k |ln(1 + gamma_i(u_k))|` (0 without jumps).
    pub k: [f64; 3],
    /// Lipschitz constants `sum_k gamma_i^2 lambda_k` of the linear jump
    /// coefficients; finite whenever the mark list is, so (H1) always holds.
    pub h1_lipschitz: [f64; 3],
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Runs every structural check on an imprecise model and reports the jump
/// constants of the moment and boundedness conditions.
pub fn validate(model: &ImpreciseModel) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name: String, passed: bool, detail: String| {
        checks.push(Check { name, passed, detail });
    };

    push(
        "S0_positive".into(),
        model.s0 > 0.0 && model.s0.is_finite(),
        format!("S0 = {}", model.s0),
    );
    for (name, iv) in model.intervals() {
        push(
            format!("{name}_positive"),
            iv.is_positive() && iv.upper().is_finite(),
            format!("{name} = {iv}"),
        );
    }

    let jumps = &model.jumps;
    let weights_ok = jumps.marks.iter().all(|m| m.weight > 0.0 && m.weight.is_finite());
    push(
        "jump_weight_positive".into(),
        weights_ok,
        format!("{} marks, total rate {}", jumps.len(), jumps.total_rate()),
    );

    let bad_gamma: Vec<String> = jumps
        .marks
        .iter()
        .enumerate()
        .flat_map(|(k, m)| {
            Compartment::ALL
                .into_iter()
                .filter(move |&c| !(m.gamma(c) > -1.0))
                .map(move |c| format!("mark {k} gamma{} = {}", c.index() + 1, m.gamma(c)))
        })
        .collect();
    push(
        "gamma_gt_neg1".into(),
        bad_gamma.is_empty(),
        if bad_gamma.is_empty() {
            "all jump coefficients exceed -1".into()
        } else {
            bad_gamma.join("; ")
        },
    );

    let mut k = [0.0; 3];
    let mut h1 = [0.0; 3];
    let mut c = 0.0_f64;
    for comp in Compartment::ALL {
        let i = comp.index();
        // ln(1 + gamma) is undefined at or below -1: report an unbounded constant.
        if jumps.marks.iter().any(|m| !(m.gamma(comp) > -1.0)) {
            c = f64::INFINITY;
            k[i] = f64::INFINITY;
        } else {
            c = c.max(jumps.log_second_moment(comp));
            k[i] = jumps
                .marks
                .iter()
                .map(|m| m.gamma(comp).ln_1p().abs())
                .fold(0.0, f64::max);
        }
        h1[i] = jumps.sum_over(comp, |g| g * g);
    }
    push(
        "jump_log_moment_bounded".into(),
        c.is_finite(),
        format!("c = {c}"),
    );
    push(
        "jump_log_bounded".into(),
        k.iter().all(|v| v.is_finite()),
        format!("K = [{}, {}, {}]", k[0], k[1], k[2]),
    );

    ValidationReport {
        checks,
        c,
        k,
        h1_lipschitz: h1,
    }
}

/// Evaluation of the moment condition
/// `D - (theta-1)/2 sigma^2 - zeta/theta > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct H3Report {
    pub theta: f64,
    pub zeta: f64,
    pub sigma_sq: f64,
    pub lhs: f64,
    pub holds: bool,
}

/// `sigma^2` is the largest squared volatility and
/// `zeta = sum_k [(1 + max_i gamma_i)^theta - 1 - min_i gamma_i] lambda_k`.
pub fn check_h3(model: &CrispModel, theta: f64) -> Result<H3Report> {
    if !(theta > 2.0) {
        return Err(Error::Domain(format!("theta must exceed 2, got {theta}")));
    }
    let sigma_sq = model
        .sigmas()
        .iter()
        .map(|s| s * s)
        .fold(0.0, f64::max);
    let zeta: f64 = model
        .jumps
        .marks
        .iter()
        .map(|m| {
            let g = m.gammas();
            let hi = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = g.iter().copied().fold(f64::INFINITY, f64::min);
            ((1.0 + hi).powf(theta) - 1.0 - lo) * m.weight
        })
        .sum();
    let lhs = model.d - 0.5 * (theta - 1.0) * sigma_sq - zeta / theta;
    Ok(H3Report {
        theta,
        zeta,
        sigma_sq,
        lhs,
        holds: lhs > 0.0,
    })
}

/// Drift of the stochastic system:
/// `(D(S0 - S) - m1 S x/delta1, m1 S x - D x - m2 x y/delta2, m2 x y - D y)`.
pub fn drift(model: &CrispModel, s: &State) -> [f64; 3] {
    let uptake = model.m1 * s.s * s.x;
    let predation = model.m2 * s.x * s.y;
    [
        model.d * (model.s0 - s.s) - uptake / model.delta1,
        uptake - model.d * s.x - predation / model.delta2,
        predation - model.d * s.y,
    ]
}

/// Right-hand side of the deterministic counterpart; identical to [`drift`].
pub fn ode_rhs(model: &CrispModel, s: &State) -> [f64; 3] {
    drift(model, s)
}
