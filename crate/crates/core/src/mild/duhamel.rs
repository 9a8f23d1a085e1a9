//! `v(t) = ∫₀ᵗ ∂ₓᵏ Φ_per(t - s) ∗ f(s) ds` on the torus.
//!
//! Each Fourier mode solves `v̂' = -μ v̂ + (2πiκ/L)ᵏ f̂` with `μ = (2πκ/L)⁴`.
//! Between frames the source is taken linear in time and the mode equation is
//! integrated exactly, so the integrable singularity of `∂ₓᵏΦ(t - s)` at
//! `s = t` never has to be sampled.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{GridField, Trajectory};
use crate::phi::phi;
use crate::spectral::{forward, inverse, wavenumber, SpectralField};

/// Highest derivative order with an integrable kernel singularity.
pub const MAX_DUHAMEL_ORDER: u32 = 3;

struct ModeStep {
    decay: Vec<f64>,
    /// weight of the source at the start of the step
    w0: Vec<f64>,
    /// weight of the source at the end of the step
    w1: Vec<f64>,
}

fn mu(i: usize, n: usize, period: f64) -> f64 {
    (2.0 * PI * wavenumber(i, n) as f64 / period).powi(4)
}

impl ModeStep {
    fn new(n: usize, period: f64, dt: f64) -> Self {
        let mut s = ModeStep {
            decay: Vec::with_capacity(n),
            w0: Vec::with_capacity(n),
            w1: Vec::with_capacity(n),
        };
        for i in 0..n {
            let [e, p1, p2, _] = phi(-mu(i, n, period) * dt);
            s.decay.push(e);
            s.w0.push(dt * (p1 - p2));
            s.w1.push(dt * p2);
        }
        s
    }
}

fn check_order(k: u32) -> Result<()> {
    if k > MAX_DUHAMEL_ORDER {
        return Err(Error::domain(format!(
            "derivative order {k} > {MAX_DUHAMEL_ORDER}: the kernel singularity is not integrable"
        )));
    }
    Ok(())
}

/// `(2πiκ/L)ᵏ f̂`, with the Nyquist slot kept real.
fn source_hat(f: &GridField, k: u32) -> Vec<Complex64> {
    let mut s = forward(f);
    let n = s.len();
    let period = s.period();
    s.apply(|i| Complex64::new(0.0, 2.0 * PI * wavenumber(i, n) as f64 / period).powu(k));
    s.coeffs().to_vec()
}

fn advance(state: &mut [Complex64], step: &ModeStep, g0: &[Complex64], g1: &[Complex64]) {
    for i in 0..state.len() {
        state[i] = step.decay[i] * state[i] + step.w0[i] * g0[i] + step.w1[i] * g1[i];
    }
}

/// `v` at every frame time of `source`, with `v = 0` at the first frame.
pub fn duhamel(source: &Trajectory, k: u32) -> Result<Trajectory> {
    check_order(k)?;
    let (n, period) = (source.grid_size(), source.period());
    let mut frames = Vec::with_capacity(source.len());
    frames.push(GridField::zeros(n, period)?);
    if source.len() > 1 {
        let step = ModeStep::new(n, period, source.dt());
        let mut state = vec![Complex64::new(0.0, 0.0); n];
        let mut prev = source_hat(&source.frames()[0], k);
        for f in &source.frames()[1..] {
            let next = source_hat(f, k);
            advance(&mut state, &step, &prev, &next);
            frames.push(inverse(&SpectralField::new(state.clone(), period)));
            prev = next;
        }
    }
    Trajectory::new(frames, source.times().to_vec())
}

/// `v(t)` for any `t` in the source's time span; the source is interpolated
/// linearly between frames.
pub fn duhamel_at(source: &Trajectory, k: u32, t: f64) -> Result<GridField> {
    check_order(k)?;
    let (n, period) = (source.grid_size(), source.period());
    let tol = 1e-12 * source.end().abs().max(1.0);
    if t < source.start() - tol || t > source.end() + tol {
        return Err(Error::domain(format!(
            "time {t} outside the source span [{}, {}]",
            source.start(),
            source.end()
        )));
    }
    if source.len() == 1 || t <= source.start() {
        return GridField::zeros(n, period);
    }
    let dt = source.dt();
    let whole = (((t - source.start()) / dt) + 1e-9).floor() as usize;
    let whole = whole.min(source.len() - 1);
    let step = ModeStep::new(n, period, dt);
    let mut state = vec![Complex64::new(0.0, 0.0); n];
    let mut prev = source_hat(&source.frames()[0], k);
    for f in &source.frames()[1..=whole] {
        let next = source_hat(f, k);
        advance(&mut state, &step, &prev, &next);
        prev = next;
    }
    let rest = t - source.times()[whole];
    if whole + 1 < source.len() && rest > tol {
        let next_full = source_hat(&source.frames()[whole + 1], k);
        let a = rest / dt;
        let g1: Vec<Complex64> = prev.iter().zip(&next_full).map(|(p, q)| p * (1.0 - a) + q * a).collect();
        let partial = ModeStep::new(n, period, rest);
        advance(&mut state, &partial, &prev, &g1);
    }
    Ok(inverse(&SpectralField::new(state, period)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_matches_scalar_ode() {
        let (l, kappa) = (1.0, 3.0);
        let src = Trajectory::from_fn(32, l, 0.0, 1e-3, 11, |x, _| (2.0 * PI * kappa * x / l).cos()).unwrap();
        let v = duhamel(&src, 0).unwrap();
        let mu = (2.0 * PI * kappa / l).powi(4);
        let t = 0.01;
        let amp = (1.0 - (-mu * t).exp()) / mu;
        let want = GridField::from_fn(32, l, |x| amp * (2.0 * PI * kappa * x / l).cos()).unwrap();
        assert!(v.last().max_abs_diff(&want) < 1e-12 * amp);
    }

    #[test]
    fn rejects_order_four() {
        let src = Trajectory::from_fn(16, 1.0, 0.0, 0.1, 3, |_, _| 0.0).unwrap();
        assert!(matches!(duhamel(&src, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn midframe_evaluation_is_consistent() {
        let src = Trajectory::from_fn(32, 1.0, 0.0, 1e-3, 21, |x, t| (2.0 * PI * x).sin() * (1.0 + 50.0 * t)).unwrap();
        let full = duhamel(&src, 3).unwrap();
        let at = duhamel_at(&src, 3, src.times()[7]).unwrap();
        assert!(at.max_abs_diff(&full.frames()[7]) < 1e-13 * full.max_abs());
        let mid = duhamel_at(&src, 1, 0.0105).unwrap();
        let coarse = duhamel_at(&src, 1, 0.010).unwrap();
        let fine = duhamel_at(&src, 1, 0.011).unwrap();
        assert!(mid.max_abs_diff(&coarse) > 0.0 && mid.max_abs_diff(&fine) > 0.0);
    }
}
