//! Lebesgue exponents in `[1, ∞]` and the criticality index `1/q + 4/q'`.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance used when deciding whether an index equals 1.
pub const CRITICAL_TOL: f64 = 1e-12;

/// An exponent `p ∈ [1, ∞]`. `∞` is stored explicitly, never as a large float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::invalid(format!("exponent must lie in [1, ∞), got {p}")))
        }
    }

    /// `1/p`, exactly 0 for `∞`.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    /// The exponent `p / d` (used for `v²` living in `L^{q/2}`).
    pub fn divide(self, d: f64) -> Result<Self> {
        match self {
            Exponent::Finite(p) => Exponent::finite(p / d),
            Exponent::Infinite => Ok(Exponent::Infinite),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => return Ok(Exponent::Infinite),
            _ => {}
        }
        let value = if let Some((num, den)) = s.split_once('/') {
            let num: f64 = num.trim().parse().map_err(|_| Error::Parse(format!("bad exponent {s:?}")))?;
            let den: f64 = den.trim().parse().map_err(|_| Error::Parse(format!("bad exponent {s:?}")))?;
            num / den
        } else {
            s.parse().map_err(|_| Error::Parse(format!("bad exponent {s:?}")))?
        };
        Exponent::finite(value)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinite => s.serialize_str("inf"),
        }
    }
}

/// A pair `(q', q)`: `q'` integrates in time, `q` in space, as in `L^{q'}(I; L^q(B))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixedExponents {
    pub space: Exponent,
    pub time: Exponent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Subcritical,
    Critical,
    Supercritical,
    /// `q = 1, q' = ∞`: critical scaling, but outside the regime where
    /// the smallness argument applies.
    ExcludedEndpoint,
}

impl fmt::Display for Criticality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Criticality::Subcritical => "subcritical",
            Criticality::Critical => "critical",
            Criticality::Supercritical => "supercritical",
            Criticality::ExcludedEndpoint => "excluded_endpoint",
        };
        f.write_str(s)
    }
}

impl MixedExponents {
    pub fn new(space: Exponent, time: Exponent) -> Self {
        Self { space, time }
    }

    /// Both exponents finite: `(q, q')`.
    pub fn finite(q: f64, q_time: f64) -> Result<Self> {
        Ok(Self::new(Exponent::finite(q)?, Exponent::finite(q_time)?))
    }

    /// The same exponent in space and time.
    pub fn diagonal(p: Exponent) -> Self {
        Self::new(p, p)
    }

    /// `1/q + 4/q'`.
    pub fn index(&self) -> f64 {
        self.space.recip() + 4.0 * self.time.recip()
    }

    pub fn criticality(&self) -> (f64, Criticality) {
        let index = self.index();
        let class = if self.space == Exponent::Finite(1.0) && self.time.is_infinite() {
            Criticality::ExcludedEndpoint
        } else if index < 1.0 - CRITICAL_TOL {
            Criticality::Subcritical
        } else if index <= 1.0 + CRITICAL_TOL {
            // index = 1 with q' = ∞ forces q = 1, handled above.
            Criticality::Critical
        } else {
            Criticality::Supercritical
        };
        (index, class)
    }

    pub fn divide(&self, d: f64) -> Result<Self> {
        Ok(Self::new(self.space.divide(d)?, self.time.divide(d)?))
    }
}

impl fmt::Display for MixedExponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L^({},{})", self.time, self.space)
    }
}

/// Shorthand for [`MixedExponents::criticality`].
pub fn criticality(exps: &MixedExponents) -> (f64, Criticality) {
    exps.criticality()
}
