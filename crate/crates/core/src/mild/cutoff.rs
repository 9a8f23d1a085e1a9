//! Smooth space-time cutoffs with exact derivatives.

use crate::error::{Error, Result};
use crate::field::{periodic_offset, GridField, ParabolicCylinder};
use crate::jet::{Jet, JET_LEN};

/// Spatial factor of a cutoff.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpaceProfile {
    /// `≡ 1` on the torus.
    Whole,
    /// `1` for `|x - center| ≤ inner`, `0` for `|x - center| ≥ outer`, periodic in `x`.
    Plateau {
        center: f64,
        inner: f64,
        outer: f64,
        period: f64,
    },
}

/// Temporal factor of a cutoff.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeProfile {
    Constant,
    /// `0` before `start`, `1` after `end`.
    Rising { start: f64, end: f64 },
    /// Rises on `[rise_start, rise_end]`, falls on `[fall_start, fall_end]`.
    Window {
        rise_start: f64,
        rise_end: f64,
        fall_start: f64,
        fall_end: f64,
    },
}

/// `φ(x, t) = ρ(x) χ(t)`, each factor built from the smooth step
/// `S(s) = h(s) / (h(s) + h(1 - s))`, `h(s) = e^{-1/s}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffFunction {
    space: SpaceProfile,
    time: TimeProfile,
}

fn h(s: Jet) -> Jet {
    if s.value() <= 0.0 {
        Jet::constant(0.0)
    } else {
        (-s.recip()).exp()
    }
}

/// Jet of `S(s₀ + slope·δ)` in `δ`.
fn smooth_step(s0: f64, slope: f64) -> Jet {
    if s0 <= 0.0 {
        return Jet::constant(0.0);
    }
    if s0 >= 1.0 {
        return Jet::constant(1.0);
    }
    let s = Jet::variable(s0, slope);
    let a = h(s);
    let b = h(Jet::constant(1.0) - s);
    a.div(&(a + b))
}

impl CutoffFunction {
    pub fn new(space: SpaceProfile, time: TimeProfile) -> Result<Self> {
        if let SpaceProfile::Plateau {
            inner,
            outer,
            period,
            center,
        } = space
        {
            if !(inner >= 0.0 && outer > inner && 2.0 * outer <= period && center.is_finite()) {
                return Err(Error::domain(format!(
                    "plateau needs 0 <= inner < outer <= L/2, got inner={inner}, outer={outer}, L={period}"
                )));
            }
        }
        let ok = match time {
            TimeProfile::Constant => true,
            TimeProfile::Rising { start, end } => end > start,
            TimeProfile::Window {
                rise_start,
                rise_end,
                fall_start,
                fall_end,
            } => rise_start < rise_end && rise_end <= fall_start && fall_start < fall_end,
        };
        if !ok {
            return Err(Error::domain(format!("time profile {time:?} is not ordered")));
        }
        Ok(Self { space, time })
    }

    /// `φ ≡ 1`.
    pub fn whole() -> Self {
        Self {
            space: SpaceProfile::Whole,
            time: TimeProfile::Constant,
        }
    }

    /// Vanishes outside `Q(z, r)` and at its bottom, equals 1 on `Q(z, θr)`.
    pub fn for_cylinder(q: &ParabolicCylinder, period: f64, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::domain(format!("inner fraction must lie in (0,1), got {theta}")));
        }
        let inner = q.shrink(theta);
        Self::new(
            SpaceProfile::Plateau {
                center: q.center,
                inner: inner.radius,
                outer: q.radius,
                period,
            },
            TimeProfile::Rising {
                start: q.bottom(),
                end: inner.bottom(),
            },
        )
    }

    /// A bump supported in `|x - center| < half_width`, `t ∈ (start, end)`, peaking at 1.
    pub fn bump(center: f64, half_width: f64, start: f64, end: f64, period: f64) -> Result<Self> {
        let mid = 0.5 * (start + end);
        Self::new(
            SpaceProfile::Plateau {
                center,
                inner: 0.0,
                outer: half_width,
                period,
            },
            TimeProfile::Window {
                rise_start: start,
                rise_end: mid,
                fall_start: mid,
                fall_end: end,
            },
        )
    }

    pub fn space_profile(&self) -> SpaceProfile {
        self.space
    }

    pub fn time_profile(&self) -> TimeProfile {
        self.time
    }

    pub fn is_time_constant(&self) -> bool {
        self.time == TimeProfile::Constant
    }

    /// `[ρ, ρ', ρ'', ρ''', ρ'''']` at `x`.
    pub fn space_derivatives(&self, x: f64) -> [f64; JET_LEN] {
        match self.space {
            SpaceProfile::Whole => Jet::constant(1.0).derivatives(),
            SpaceProfile::Plateau {
                center,
                inner,
                outer,
                period,
            } => {
                let d = periodic_offset(x - center, period);
                let w = outer - inner;
                let slope = if d >= 0.0 { -1.0 / w } else { 1.0 / w };
                smooth_step((outer - d.abs()) / w, slope).derivatives()
            }
        }
    }

    /// `[χ, χ']` at `t`.
    pub fn time_derivatives(&self, t: f64) -> [f64; 2] {
        let j = match self.time {
            TimeProfile::Constant => Jet::constant(1.0),
            TimeProfile::Rising { start, end } => {
                let w = end - start;
                smooth_step((t - start) / w, 1.0 / w)
            }
            TimeProfile::Window {
                rise_start,
                rise_end,
                fall_start,
                fall_end,
            } => {
                let (a, b) = (rise_end - rise_start, fall_end - fall_start);
                smooth_step((t - rise_start) / a, 1.0 / a) * smooth_step((fall_end - t) / b, -1.0 / b)
            }
        };
        let d = j.derivatives();
        [d[0], d[1]]
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.space_derivatives(x)[0] * self.time_derivatives(t)[0]
    }

    /// Time interval outside which `φ` vanishes (infinite ends where it does not).
    pub fn time_support(&self) -> (f64, f64) {
        match self.time {
            TimeProfile::Constant => (f64::NEG_INFINITY, f64::INFINITY),
            TimeProfile::Rising { start, .. } => (start, f64::INFINITY),
            TimeProfile::Window {
                rise_start,
                fall_end,
                ..
            } => (rise_start, fall_end),
        }
    }

    /// Spatial derivatives `∂ₓᵐ φ(·, t)`, `m = 0..=4`, sampled on the grid.
    pub fn sample(&self, n: usize, period: f64, t: f64) -> Result<[GridField; JET_LEN]> {
        let [chi, _] = self.time_derivatives(t);
        let cols: Vec<[f64; JET_LEN]> = (0..n)
            .map(|j| self.space_derivatives(j as f64 * period / n as f64))
            .collect();
        let mk = |m: usize| GridField::new(cols.iter().map(|c| c[m] * chi).collect(), period);
        Ok([mk(0)?, mk(1)?, mk(2)?, mk(3)?, mk(4)?])
    }

    /// `φ_t(·, t)` sampled on the grid.
    pub fn sample_time_derivative(&self, n: usize, period: f64, t: f64) -> Result<GridField> {
        let [_, dchi] = self.time_derivatives(t);
        GridField::from_fn(n, period, |x| self.space_derivatives(x)[0] * dchi)
    }

    /// Checks that data of period `period` starting at `start` covers the support.
    pub fn check_support(&self, period: f64, start: f64) -> Result<()> {
        if let SpaceProfile::Plateau { period: p, .. } = self.space {
            if (p - period).abs() > 1e-12 * period {
                return Err(Error::domain(format!(
                    "cutoff period {p} differs from field period {period}"
                )));
            }
        }
        let (lo, _) = self.time_support();
        if lo < start - 1e-12 * start.abs().max(1.0) && self.time != TimeProfile::Constant {
            return Err(Error::domain(format!(
                "cutoff support starts at t = {lo}, before the data at t = {start}"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_values_and_bounds() {
        let q = ParabolicCylinder::new(0.5, 1.0, 0.2).unwrap();
        let c = CutoffFunction::for_cylinder(&q, 1.0, 0.5).unwrap();
        assert_eq!(c.value(0.5, 1.0), 1.0);
        assert_eq!(c.value(0.59, 0.9999), 1.0);
        assert_eq!(c.value(0.71, 1.0), 0.0);
        assert_eq!(c.value(0.5, q.bottom()), 0.0);
        for i in 0..200 {
            let x = i as f64 / 200.0;
            let t = q.bottom() + (i as f64 / 199.0) * q.height();
            let v = c.value(x, t);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let c = CutoffFunction::bump(0.3, 0.2, 0.0, 1.0, 1.0).unwrap();
        let h = 2e-5;
        for &x in &[0.15, 0.22, 0.37, 0.45] {
            let d = c.space_derivatives(x);
            for m in 0..4 {
                let fd = (c.space_derivatives(x + h)[m] - c.space_derivatives(x - h)[m]) / (2.0 * h);
                assert!((fd - d[m + 1]).abs() < 1e-5 * d[m + 1].abs().max(1.0), "m={m} x={x} {fd} {}", d[m + 1]);
            }
        }
        for &t in &[0.1, 0.4, 0.8] {
            let fd = (c.time_derivatives(t + h)[0] - c.time_derivatives(t - h)[0]) / (2.0 * h);
            assert!((fd - c.time_derivatives(t)[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn periodic_in_space() {
        let c = CutoffFunction::bump(0.05, 0.1, 0.0, 1.0, 1.0).unwrap();
        assert!((c.value(0.98, 0.5) - c.value(-0.02, 0.5)).abs() < 1e-15);
        assert!(c.value(0.98, 0.5) > 0.0);
    }

    #[test]
    fn rejects_bad_profiles() {
        let bad = SpaceProfile::Plateau {
            center: 0.0,
            inner: 0.3,
            outer: 0.6,
            period: 1.0,
        };
        assert!(CutoffFunction::new(bad, TimeProfile::Constant).is_err());
        assert!(CutoffFunction::new(SpaceProfile::Whole, TimeProfile::Rising { start: 1.0, end: 0.5 }).is_err());
    }
}
