//! Closed real intervals and the geometric interval-valued function used to
//! turn an imprecise parameter `[lower, upper]` into a crisp number.
//!
//! Subtraction and division follow the imprecise-parameter literature rather
//! than textbook interval arithmetic: `A - B = [al - bl, au - bu]` (endpoints
//! re-sorted afterwards) and `A / B = A * [1/bl, 1/bu]`. No outward rounding
//! is performed.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalNumber {
    lower: f64,
    upper: f64,
}

impl IntervalNumber {
    /// Builds `[lower, upper]`. Rejects NaN endpoints and `lower > upper`.
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() {
            return Err(Error::Domain(format!(
                "interval endpoints must not be NaN: [{lower}, {upper}]"
            )));
        }
        if lower > upper {
            return Err(Error::Domain(format!(
                "interval lower endpoint exceeds upper: [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// The degenerate interval `[value, value]`.
    pub const fn point(value: f64) -> Self {
        Self {
            lower: value,
            upper: value,
        }
    }

    /// Orders the two endpoints before building the interval.
    fn sorted(a: f64, b: f64) -> Self {
        if a <= b {
            Self { lower: a, upper: b }
        } else {
            Self { lower: b, upper: a }
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn is_degenerate(&self) -> bool {
        self.lower == self.upper
    }

    pub fn is_positive(&self) -> bool {
        self.lower > 0.0 && self.upper > 0.0
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Self) -> Self {
        Self::sorted(self.lower + other.lower, self.upper + other.upper)
    }

    /// Endpoint-wise difference `[al - bl, au - bu]`, re-sorted so the result
    /// is a valid interval.
    pub fn subtract(self, other: Self) -> Self {
        Self::sorted(self.lower - other.lower, self.upper - other.upper)
    }

    /// `alpha * [l, u]` for strictly positive `alpha`.
    pub fn scale(self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!(
                "scalar multiplier must be positive, got {alpha}"
            )));
        }
        Ok(Self::sorted(alpha * self.lower, alpha * self.upper))
    }

    pub fn multiply(self, other: Self) -> Self {
        let products = [
            self.lower * other.lower,
            self.upper * other.lower,
            self.lower * other.upper,
            self.upper * other.upper,
        ];
        let lo = products.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = products.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { lower: lo, upper: hi }
    }

    /// `A * [1/bl, 1/bu]`: min/max over the four endpoint products with the
    /// reciprocal pair, which restores the ordering the reversed pair breaks.
    /// Each product `a * (1/b)` is evaluated as the single quotient `a / b`
    /// so degenerate intervals reproduce real division bit for bit.
    pub fn divide(self, other: Self) -> Result<Self> {
        if other.contains(0.0) {
            return Err(Error::Domain(format!(
                "divisor [{}, {}] contains zero",
                other.lower, other.upper
            )));
        }
        let quotients = [
            self.lower / other.lower,
            self.upper / other.lower,
            self.lower / other.upper,
            self.upper / other.upper,
        ];
        let lo = quotients.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = quotients.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { lower: lo, upper: hi })
    }

    /// Geometric interpolation `lower^(1-p) * upper^p` for `p` in `[0, 1]`.
    ///
    /// Requires both endpoints strictly positive. Returns the endpoints
    /// exactly at `p = 0` and `p = 1`, and is nondecreasing in `p`.
    pub fn value_at(&self, p: f64) -> Result<f64> {
        if !self.is_positive() {
            return Err(Error::Domain(format!(
                "interval-valued function needs positive endpoints, got [{}, {}]",
                self.lower, self.upper
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
        }
        if p == 0.0 || self.is_degenerate() {
            return Ok(self.lower);
        }
        if p == 1.0 {
            return Ok(self.upper);
        }
        let value = self.lower * (self.upper / self.lower).powf(p);
        Ok(value.clamp(self.lower, self.upper))
    }
}

impl fmt::Display for IntervalNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

impl Add for IntervalNumber {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        IntervalNumber::add(self, rhs)
    }
}

impl Sub for IntervalNumber {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self.subtract(rhs)
    }
}

impl Mul for IntervalNumber {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        self.multiply(rhs)
    }
}

impl From<f64> for IntervalNumber {
    fn from(value: f64) -> Self {
        Self::point(value)
    }
}

/// On-disk form: a bare number `n` (shorthand for `[n, n]`) or `[lower, upper]`.
#[derive(Deserialize)]
#[serde(untagged)]
enum IntervalRepr {
    Point(f64),
    Pair([f64; 2]),
}

impl<'de> Deserialize<'de> for IntervalNumber {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = IntervalRepr::deserialize(deserializer).map_err(|_| {
            serde::de::Error::custom("expected a number or a two-element array [lower, upper]")
        })?;
        match repr {
            IntervalRepr::Point(v) => Ok(Self::point(v)),
            IntervalRepr::Pair([lo, hi]) => Self::new(lo, hi).map_err(serde::de::Error::custom),
        }
    }
}

impl Serialize for IntervalNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_degenerate() {
            serializer.serialize_f64(self.lower)
        } else {
            [self.lower, self.upper].serialize(serializer)
        }
    }
}
