//! The biharmonic heat kernel
//!
//! ```text
//! Φ(x, t) = c t^{-1/4} K(|x| / t^{1/4}),   K(r) = ∫₀^∞ e^{-s⁴} cos(r s) ds,
//! ```
//!
//! its spatial derivatives, its `Lᵖ` norms and its periodization to the torus.
//!
//! `K` changes sign, so `‖Φ(t)‖₁ = 1` and `∫Φ(t) = 1` cannot both hold. The
//! kernel here carries unit mass (`c = 1/π`, since `∫_ℝ K = π`), which is what
//! makes `Φ(t) ∗ f → f` as `t → 0` and gives the semigroup property; the
//! resulting `‖Φ(t)‖₁ > 1` is reported as a constant.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::field::GridField;
use crate::quadrature::composite;
use crate::spectral::{inverse, wavenumber, SpectralField};

/// Upper limit of the `s`-integral; `e^{-S⁴} ≈ 1.4e-20`.
pub const S_MAX: f64 = 2.6;
/// Largest supported profile argument `|r|`.
pub const MAX_ARGUMENT: f64 = 2000.0;
/// Profile values beyond this argument are below double precision relative to `K(0)`.
pub const PROFILE_CUTOFF: f64 = 40.0;
/// Highest profile derivative order.
pub const MAX_ORDER: usize = 4;
/// Largest image count accepted by [`KernelEval::periodized_kernel`].
pub const MAX_IMAGES: usize = 4096;

const BASE_PANEL: f64 = 0.1;
const GL_ORDER: usize = 16;
const TABLE_PANEL: f64 = 0.05;
const TABLE_ORDER: usize = 8;

/// `c = 1/π`.
pub const NORMALIZATION: f64 = 1.0 / PI;

struct ProfileTable {
    weights: Vec<f64>,
    /// `values[k][i] = K^{(k)}(rᵢ)` at the quadrature nodes `rᵢ` on `[0, PROFILE_CUTOFF]`
    values: [Vec<f64>; MAX_ORDER + 1],
    sup: [f64; MAX_ORDER + 1],
}

/// Quadrature context for `K`, `Φ` and their derivatives.
pub struct KernelEval {
    s_nodes: Vec<f64>,
    /// Gauss weights times `e^{-s⁴}`.
    s_weights: Vec<f64>,
    table: OnceLock<ProfileTable>,
}

impl Default for KernelEval {
    fn default() -> Self {
        Self::new()
    }
}

/// `Φ`'s normalization constant and the `L¹` norm it implies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalization {
    pub c: f64,
    /// `‖Φ(t)‖₁`, independent of `t`.
    pub l1_norm: f64,
}

/// `d^k/dr^k cos(r s) / s^k`, cycling `cos → -sin → -cos → sin`.
fn trig(k: usize, sin: f64, cos: f64) -> f64 {
    match k % 4 {
        0 => cos,
        1 => -sin,
        2 => -cos,
        _ => sin,
    }
}

impl KernelEval {
    pub fn new() -> Self {
        let panels = (S_MAX / BASE_PANEL).round() as usize;
        let (s_nodes, w) = composite(0.0, S_MAX, panels, GL_ORDER);
        let s_weights = s_nodes.iter().zip(&w).map(|(s, w)| w * (-s.powi(4)).exp()).collect();
        Self {
            s_nodes,
            s_weights,
            table: OnceLock::new(),
        }
    }

    /// A process-wide instance whose tables are built once.
    pub fn shared() -> &'static KernelEval {
        static SHARED: OnceLock<KernelEval> = OnceLock::new();
        SHARED.get_or_init(KernelEval::new)
    }

    pub fn normalization(&self) -> Normalization {
        let t = self.table();
        let l1 = 2.0 * t.weights.iter().zip(&t.values[0]).map(|(w, v)| w * v.abs()).sum::<f64>();
        Normalization {
            c: NORMALIZATION,
            l1_norm: NORMALIZATION * l1,
        }
    }

    /// All profile derivatives `K^{(k)}(r)`, `k = 0..=4`.
    pub fn profile_all(&self, r: f64) -> Result<[f64; MAX_ORDER + 1]> {
        if !r.is_finite() || r.abs() > MAX_ARGUMENT {
            return Err(Error::Accuracy(format!(
                "profile argument {r} beyond the oscillation budget |r| <= {MAX_ARGUMENT}"
            )));
        }
        let width = (0.5 * PI / r.abs()).min(BASE_PANEL);
        let mut acc = [0.0; MAX_ORDER + 1];
        let mut add = |s: f64, w: f64| {
            let (sin, cos) = (r * s).sin_cos();
            let mut sk = w;
            for (k, a) in acc.iter_mut().enumerate() {
                *a += sk * trig(k, sin, cos);
                sk *= s;
            }
        };
        if width >= BASE_PANEL {
            for (s, w) in self.s_nodes.iter().zip(&self.s_weights) {
                add(*s, *w);
            }
        } else {
            let panels = (S_MAX / width).ceil() as usize;
            let (nodes, weights) = composite(0.0, S_MAX, panels, GL_ORDER);
            for (s, w) in nodes.iter().zip(&weights) {
                add(*s, w * (-s.powi(4)).exp());
            }
        }
        Ok(acc)
    }

    /// `K^{(k)}(r) = ∫₀^∞ e^{-s⁴} sᵏ trig_k(r s) ds`.
    pub fn profile(&self, r: f64, k: usize) -> Result<f64> {
        if k > MAX_ORDER {
            return Err(Error::domain(format!("profile derivative order {k} > {MAX_ORDER}")));
        }
        Ok(self.profile_all(r)?[k])
    }

    /// `∂ₓᵏ Φ(x, t) = c t^{-(k+1)/4} K^{(k)}(x / t^{1/4})`.
    pub fn eval_kernel(&self, x: f64, t: f64, k: usize) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("kernel time must be positive, got {t}")));
        }
        let q = t.powf(0.25);
        Ok(NORMALIZATION * q.powi(-(k as i32 + 1)) * self.profile(x / q, k)?)
    }

    fn table(&self) -> &ProfileTable {
        self.table.get_or_init(|| {
            let panels = (PROFILE_CUTOFF / TABLE_PANEL).round() as usize;
            let (nodes, weights) = composite(0.0, PROFILE_CUTOFF, panels, TABLE_ORDER);
            let mut values: [Vec<f64>; MAX_ORDER + 1] = Default::default();
            for v in values.iter_mut() {
                v.reserve(nodes.len());
            }
            for &r in &nodes {
                let all = self.profile_all(r).expect("table nodes are within budget");
                for (k, v) in all.iter().enumerate() {
                    values[k].push(*v);
                }
            }
            let mut sup = [0.0; MAX_ORDER + 1];
            for (k, s) in sup.iter_mut().enumerate() {
                *s = self.profile_sup(k);
            }
            ProfileTable {
                weights,
                values,
                sup,
            }
        })
    }

    /// `max_r |K^{(k)}(r)|` by a coarse scan followed by golden-section refinement.
    fn profile_sup(&self, k: usize) -> f64 {
        let f = |r: f64| self.profile(r, k).map(f64::abs).unwrap_or(0.0);
        let step = 0.01;
        let mut best = (0.0, f(0.0));
        let mut r = step;
        while r <= 10.0 {
            let v = f(r);
            if v > best.1 {
                best = (r, v);
            }
            r += step;
        }
        let (mut a, mut b) = ((best.0 - step).max(0.0), best.0 + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best.1.max(f(0.5 * (a + b)))
    }

    /// `∫_ℝ Φ(x, t) dx` by quadrature on `|x| <= PROFILE_CUTOFF t^{1/4}`.
    pub fn mass(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("kernel time must be positive, got {t}")));
        }
        let tab = self.table();
        let q = t.powf(0.25);
        let sum: f64 = tab
            .weights
            .iter()
            .zip(&tab.values[0])
            .map(|(w, v)| (w * q) * (NORMALIZATION / q * v))
            .sum();
        Ok(2.0 * sum)
    }

    /// `‖∂ₓᵏ Φ(t)‖_p` over `|x| <= PROFILE_CUTOFF t^{1/4}`.
    pub fn kernel_lp_norm(&self, t: f64, p: Exponent, k: usize) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("kernel time must be positive, got {t}")));
        }
        if k > MAX_ORDER {
            return Err(Error::domain(format!("derivative order {k} > {MAX_ORDER}")));
        }
        let tab = self.table();
        let q = t.powf(0.25);
        let amp = NORMALIZATION * q.powi(-(k as i32 + 1));
        Ok(match p {
            Exponent::Infinite => amp * tab.sup[k],
            Exponent::Finite(p) => {
                let s: f64 = tab
                    .weights
                    .iter()
                    .zip(&tab.values[k])
                    .map(|(w, v)| (w * q) * (amp * v.abs()).powf(p))
                    .sum();
                (2.0 * s).powf(1.0 / p)
            }
        })
    }

    /// `Σₙ ∂ₓᵏ Φ(x + nL, t)` on the `N`-point grid, by direct image summation.
    pub fn periodized_kernel(&self, t: f64, n: usize, period: f64, k: usize) -> Result<GridField> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("kernel time must be positive, got {t}")));
        }
        let q = t.powf(0.25);
        let reach = PROFILE_CUTOFF * q;
        let lo = (-reach / period).floor() as i64 - 1;
        let hi = (reach / period).ceil() as i64 + 1;
        let images = (hi - lo + 1) as usize;
        if images > MAX_IMAGES {
            return Err(Error::Accuracy(format!(
                "periodization at t = {t} needs {images} images (limit {MAX_IMAGES})"
            )));
        }
        let amp = NORMALIZATION * q.powi(-(k as i32 + 1));
        GridField::from_fn(n, period, |x| {
            let mut sum = 0.0;
            for m in lo..=hi {
                let r = (x + m as f64 * period) / q;
                if r.abs() <= PROFILE_CUTOFF {
                    sum += self.profile(r, k).expect("argument within cutoff");
                }
            }
            amp * sum
        })
    }
}

/// Periodized `∂ₓᵏ Φ(t)` from its Fourier series `L⁻¹ (2πiκ/L)ᵏ e^{-(2πκ/L)⁴ t}`.
pub fn periodized_kernel_spectral(t: f64, n: usize, period: f64, k: u32) -> Result<GridField> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("kernel time must be positive, got {t}")));
    }
    GridField::zeros(n, period)?;
    let mut s = SpectralField::zeros(n, period);
    let coeffs = s.coeffs_mut();
    for (i, c) in coeffs.iter_mut().enumerate() {
        let theta = 2.0 * PI * wavenumber(i, n) as f64 / period;
        *c = Complex64::new(0.0, theta).powu(k) * (-(theta.powi(4)) * t).exp() / period;
    }
    if k % 2 == 1 {
        coeffs[n / 2] = Complex64::new(0.0, 0.0);
    }
    Ok(inverse(&s))
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = points.iter().fold((0.0, 0.0), |(n, d), (x, y)| {
        let dx = x.ln() - mx;
        (n + dx * (y.ln() - my), d + dx * dx)
    });
    num / den
}

/// Predicted decay exponent `-(k + 1 - 1/p)/4` of `‖∂ₓᵏΦ(t)‖_p`.
pub fn decay_exponent(p: Exponent, k: usize) -> f64 {
    -(k as f64 + 1.0 - p.recip()) / 4.0
}

/// Times `10^{-2}, 10^{-1.5}, …, 10²`.
pub fn decade_times() -> Vec<f64> {
    (0..9).map(|i| 10f64.powf(-2.0 + 0.5 * i as f64)).collect()
}

/// Fitted decay slope of `‖∂ₓᵏΦ(t)‖_p` over [`decade_times`].
pub fn decay_slope(eval: &KernelEval, p: Exponent, k: usize) -> Result<f64> {
    let pts = decade_times()
        .into_iter()
        .map(|t| Ok((t, eval.kernel_lp_norm(t, p, k)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(log_log_slope(&pts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_symmetries() {
        let ev = KernelEval::shared();
        for &r in &[0.5, 3.0, 10.0] {
            let a = ev.profile(r, 0).unwrap();
            let b = ev.profile(-r, 0).unwrap();
            assert!((a - b).abs() < 1e-15);
            let a1 = ev.profile(r, 1).unwrap();
            let b1 = ev.profile(-r, 1).unwrap();
            assert!((a1 + b1).abs() < 1e-15);
        }
        assert_eq!(ev.profile(0.0, 1).unwrap(), 0.0);
        assert_eq!(ev.profile(0.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn profile_errors() {
        let ev = KernelEval::shared();
        assert!(matches!(ev.profile(1.0, 5), Err(Error::Domain(_))));
        assert!(matches!(ev.profile(1e5, 0), Err(Error::Accuracy(_))));
        assert!(matches!(ev.eval_kernel(0.0, 0.0, 0), Err(Error::Domain(_))));
        assert!(matches!(ev.eval_kernel(0.0, -1.0, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn profile_derivatives_match_finite_differences() {
        let ev = KernelEval::shared();
        let h = 1e-3;
        for &r in &[0.3, 1.7, 4.2] {
            for k in 0..MAX_ORDER {
                let fd = (ev.profile(r + h, k).unwrap() - ev.profile(r - h, k).unwrap()) / (2.0 * h);
                let d = ev.profile(r, k + 1).unwrap();
                assert!((fd - d).abs() < 1e-6, "k={k} r={r}: {fd} vs {d}");
            }
        }
    }

    #[test]
    fn kernel_scaling_and_parity() {
        let ev = KernelEval::shared();
        let (lam, x, t) = (2.0_f64, 0.7, 0.3);
        let a = ev.eval_kernel(lam * x, lam.powi(4) * t, 0).unwrap();
        let b = ev.eval_kernel(x, t, 0).unwrap() / lam;
        assert!((a - b).abs() < 1e-12);
        for &t in &[0.01, 1.0, 7.0] {
            assert_eq!(ev.eval_kernel(0.0, t, 1).unwrap(), 0.0);
        }
    }

    #[test]
    fn mass_one_and_l1_above_one() {
        let ev = KernelEval::shared();
        for &t in &[1e-2, 1.0, 1e2] {
            assert!((ev.mass(t).unwrap() - 1.0).abs() < 1e-10);
        }
        assert!(ev.normalization().l1_norm > 1.0);
    }

    #[test]
    fn periodized_mean_is_inverse_period() {
        let ev = KernelEval::shared();
        let f = ev.periodized_kernel(0.01, 64, 1.0, 0).unwrap();
        assert!((f.mean() - 1.0).abs() < 1e-10);
        let g = periodized_kernel_spectral(0.3, 64, 2.5, 0).unwrap();
        assert!((g.mean() - 1.0 / 2.5).abs() < 1e-14);
    }

    #[test]
    fn periodization_image_budget() {
        let ev = KernelEval::shared();
        match ev.periodized_kernel(1e12, 16, 1.0, 0) {
            Err(Error::Accuracy(msg)) => assert!(msg.contains("images")),
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }
}
