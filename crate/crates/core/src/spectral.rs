//! Fourier analysis on the torus `ℝ / Lℤ`.
//!
//! Coefficients are normalized as `c_κ = N⁻¹ Σ_j f(x_j) e^{-2πiκ x_j / L}`, so a
//! single mode `e^{2πiκx/L}` has coefficient 1 and the whole-line transform
//! `∫ f e^{-2πixξ} dx` at `ξ = κ/L` equals `L c_κ`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::{periodic_offset, GridField};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let plan = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        plan.process(buf);
    });
}

/// Fourier coefficients of a real periodic field, stored in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    coeffs: Vec<Complex64>,
    period: f64,
}

/// Integer wavenumber of FFT slot `i` on an `n`-point grid, in `[-n/2, n/2)`.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl SpectralField {
    pub fn new(coeffs: Vec<Complex64>, period: f64) -> Self {
        Self { coeffs, period }
    }

    pub fn zeros(n: usize, period: f64) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); n], period)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn wavenumber(&self, i: usize) -> i64 {
        wavenumber(i, self.coeffs.len())
    }

    /// Angular wavenumber `2πκ/L` of slot `i`.
    pub fn angular(&self, i: usize) -> f64 {
        2.0 * PI * self.wavenumber(i) as f64 / self.period
    }

    /// Multiplies slot `i` by `m(i)`. At the Nyquist slot only the real part of
    /// the multiplier is kept so the field stays real.
    pub fn apply(&mut self, m: impl Fn(usize) -> Complex64) {
        let n = self.coeffs.len();
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            let mut mi = m(i);
            if i == n / 2 {
                mi = Complex64::new(mi.re, 0.0);
            }
            *c *= mi;
        }
    }

    pub fn map(&self, m: impl Fn(usize) -> Complex64) -> SpectralField {
        let mut out = self.clone();
        out.apply(m);
        out
    }

    /// Multiplier of `∂ₓᵏ`: `(2πiκ/L)ᵏ`.
    pub fn derivative_symbol(&self, i: usize, k: u32) -> Complex64 {
        Complex64::new(0.0, self.angular(i)).powu(k)
    }

    /// `L Σ |c_κ|²`, which equals the Riemann-sum `‖f‖₂²`.
    pub fn energy(&self) -> f64 {
        self.period * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Zeroes every mode with `|κ| > N/3`.
    pub fn dealias(&mut self) {
        let n = self.coeffs.len();
        let cut = (n / 3) as i64;
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            if wavenumber(i, n).abs() > cut {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn to_field(&self) -> GridField {
        inverse(self)
    }
}

pub fn forward(f: &GridField) -> SpectralField {
    let n = f.len();
    let mut buf: Vec<Complex64> = f.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut buf, false);
    let scale = 1.0 / n as f64;
    for c in &mut buf {
        *c *= scale;
    }
    SpectralField::new(buf, f.period())
}

pub fn inverse(s: &SpectralField) -> GridField {
    let mut buf = s.coeffs.clone();
    fft_in_place(&mut buf, true);
    GridField::new(buf.into_iter().map(|c| c.re).collect(), s.period)
        .expect("spectral field has a valid grid size")
}

/// `∂ₓᵏ f`, exact for band-limited fields.
pub fn derivative(f: &GridField, k: u32) -> GridField {
    if k == 0 {
        return f.clone();
    }
    let mut s = forward(f);
    let n = s.len();
    let period = s.period();
    s.apply(|i| Complex64::new(0.0, 2.0 * PI * wavenumber(i, n) as f64 / period).powu(k));
    inverse(&s)
}

/// `Λˢ f` with multiplier `|κ/L|ˢ`; `s = 0` is the identity.
pub fn fractional(f: &GridField, s: f64) -> Result<GridField> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::invalid(format!("fractional order must be ≥ 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(f.clone());
    }
    let mut c = forward(f);
    let n = c.len();
    let period = c.period();
    c.apply(|i| Complex64::new((wavenumber(i, n) as f64 / period).abs().powf(s), 0.0));
    Ok(inverse(&c))
}

/// Periodic convolution `∫₀ᴸ f(y) g(x - y) dy` (coefficients `L c_f c_g`).
pub fn convolve(f: &GridField, g: &GridField) -> Result<GridField> {
    f.check_same_grid(g)?;
    let a = forward(f);
    let b = forward(g);
    let l = f.period();
    let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y * l).collect();
    Ok(inverse(&SpectralField::new(coeffs, l)))
}

/// Trigonometric interpolant of `f` sampled on `factor` times as many points;
/// the Nyquist coefficient is split evenly between `±N/2`.
pub fn interpolate(f: &GridField, factor: usize) -> Result<GridField> {
    if factor == 0 {
        return Err(Error::invalid("refinement factor must be positive"));
    }
    let c = forward(f);
    let n = c.len();
    let m = n * factor;
    let mut fine = vec![Complex64::new(0.0, 0.0); m];
    for (i, v) in c.coeffs.iter().enumerate() {
        let k = wavenumber(i, n);
        let slot = |k: i64| k.rem_euclid(m as i64) as usize;
        if factor > 1 && n % 2 == 0 && k == -(n as i64) / 2 {
            fine[slot(k)] += 0.5 * v;
            fine[slot(-k)] += 0.5 * v;
        } else {
            fine[slot(k)] += v;
        }
    }
    Ok(inverse(&SpectralField::new(fine, c.period)))
}

/// `‖f‖_{Hˢ}² = L Σ (1 + |κ/L|^{2s}) |c_κ|²`.
pub fn sobolev_norm(f: &GridField, s: f64) -> f64 {
    let c = forward(f);
    let n = c.len();
    let l = c.period();
    (l * c
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, v)| (1.0 + (wavenumber(i, n) as f64 / l).abs().powf(2.0 * s)) * v.norm_sqr())
        .sum::<f64>())
    .sqrt()
}

/// Spatial window for the Slobodeckij double integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window {
    /// Whole torus with the periodic distance.
    Torus,
    /// `[start, start + length)` taken periodically, with the plain distance.
    Interval { start: f64, length: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlobodeckijNorm {
    /// `(∫_W |f|²)^{1/2}`
    pub l2: f64,
    /// `(∫_W ∫_W |f(x)-f(y)|² / |x-y|^{1+2s})^{1/2}`
    pub seminorm: f64,
}

impl SlobodeckijNorm {
    pub fn total(&self) -> f64 {
        (self.l2 * self.l2 + self.seminorm * self.seminorm).sqrt()
    }
}

/// Riemann-sum `W^{s,2}` norm over a window. Cells closer than one grid
/// spacing to the diagonal (here: `x = y`) are excluded.
pub fn slobodeckij_norm(f: &GridField, s: f64, window: Window) -> Result<SlobodeckijNorm> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::invalid(format!("Slobodeckij order must lie in (0,1), got {s}")));
    }
    let n = f.len();
    let h = f.spacing();
    let l = f.period();
    let (points, periodic): (Vec<(f64, f64)>, bool) = match window {
        Window::Torus => ((0..n).map(|j| (f.x(j), f.samples()[j])).collect(), true),
        Window::Interval { start, length } => {
            if !(length > 0.0 && length <= l * (1.0 + 1e-12)) {
                return Err(Error::invalid(format!("window length {length} not in (0, L]")));
            }
            let pts = (0..n)
                .filter_map(|j| {
                    let off = (f.x(j) - start).rem_euclid(l);
                    (off < length - 1e-9 * h).then_some((off, f.samples()[j]))
                })
                .collect();
            (pts, false)
        }
    };
    let l2 = (points.iter().map(|(_, v)| v * v).sum::<f64>() * h).sqrt();
    let exponent = 1.0 + 2.0 * s;
    let mut semi = 0.0;
    for (a, &(xa, fa)) in points.iter().enumerate() {
        for &(xb, fb) in points.iter().skip(a + 1) {
            let d = if periodic {
                periodic_offset(xa - xb, l).abs()
            } else {
                (xa - xb).abs()
            };
            if d < 0.5 * h {
                continue;
            }
            semi += (fa - fb).powi(2) / d.powf(exponent);
        }
    }
    // Each unordered pair appears twice in the double integral.
    let seminorm = (2.0 * semi * h * h).sqrt();
    Ok(SlobodeckijNorm { l2, seminorm })
}
