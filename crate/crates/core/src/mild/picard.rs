//! Picard iteration `w_{m+1} = -D₃[v w_m] + w₀`, `w₀ = D₀[f_v]`, where `D_k`
//! is the Duhamel operator with `k` derivatives on the kernel.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::{Exponent, MixedExponents};
use crate::field::{GridField, Region, Trajectory};
use crate::norm::mixed_norm;
use crate::phi::phi;
use crate::spectral::{derivative, forward, inverse, wavenumber, SpectralField};

use super::cutoff::CutoffFunction;
use super::duhamel::duhamel;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PicardReport {
    /// Number of iterates produced after the starting one.
    pub iterates: usize,
    /// `‖w_{m+1} - w_m‖_{L^∞L^∞}`.
    pub differences: Vec<f64>,
    /// `differences[m+1] / differences[m]`.
    pub ratios: Vec<f64>,
    /// `‖v‖_{L^{q'}L^q}` over the whole trajectory.
    pub smallness: f64,
    pub exponents: MixedExponents,
    pub tolerance: f64,
    pub converged: bool,
}

impl PicardReport {
    pub fn max_ratio(&self) -> Option<f64> {
        self.ratios.iter().copied().reduce(f64::max)
    }
}

fn sup_norm() -> MixedExponents {
    MixedExponents::diagonal(Exponent::Infinite)
}

/// The source of the localized equation for `w = φ v`:
///
/// ```text
/// f_v = v φ_t + 4 v_xxx φ_x + 6 v_xx φ_xx + 4 v_x φ_xxx + v φ_xxxx
///     + 3 φ_x (v²)_xx + 3 φ_xx (v²)_x + φ_xxx v²
/// ```
pub fn assemble_fv(v: &Trajectory, cutoff: &CutoffFunction) -> Result<Trajectory> {
    cutoff.check_support(v.period(), v.start())?;
    let (n, period) = (v.grid_size(), v.period());
    let frames = v
        .frames()
        .iter()
        .zip(v.times())
        .map(|(f, &t)| {
            let p = cutoff.sample(n, period, t)?;
            let pt = cutoff.sample_time_derivative(n, period, t)?;
            let vd = [f.clone(), derivative(f, 1), derivative(f, 2), derivative(f, 3)];
            let sq = f.map(|x| x * x);
            let sqd = [derivative(&sq, 1), derivative(&sq, 2)];
            let out = (0..n)
                .map(|j| {
                    let ph = |m: usize| p[m].samples()[j];
                    let v = |m: usize| vd[m].samples()[j];
                    v(0) * pt.samples()[j]
                        + 4.0 * v(3) * ph(1)
                        + 6.0 * v(2) * ph(2)
                        + 4.0 * v(1) * ph(3)
                        + v(0) * ph(4)
                        + 3.0 * ph(1) * sqd[1].samples()[j]
                        + 3.0 * ph(2) * sqd[0].samples()[j]
                        + ph(3) * sq.samples()[j]
                })
                .collect();
            GridField::new(out, period)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(frames, v.times().to_vec())
}

fn product(v: &Trajectory, w: &Trajectory) -> Result<Trajectory> {
    v.zip_frames(w, |a, b| a.zip_with(b, |x, y| x * y))
}

/// `-D₃[v w] + w₀`.
pub fn picard_map(v: &Trajectory, w: &Trajectory, w0: &Trajectory) -> Result<Trajectory> {
    let d = duhamel(&product(v, w)?, 3)?;
    w0.zip_frames(&d, |a, b| a.zip_with(b, |x, y| x - y))
}

/// Iterates from `w₀ = D₀[f_v]` until successive iterates differ by less than `tol` in `L^∞`.
pub fn picard_solve(
    v: &Trajectory,
    cutoff: &CutoffFunction,
    exps: &MixedExponents,
    tol: f64,
    max_iter: usize,
) -> Result<(Trajectory, PicardReport)> {
    let w0 = duhamel(&assemble_fv(v, cutoff)?, 0)?;
    iterate(v, &w0, w0.clone(), exps, tol, max_iter)
}

/// As [`picard_solve`] but starting from `start` instead of `w₀`.
pub fn picard_solve_from(
    v: &Trajectory,
    cutoff: &CutoffFunction,
    exps: &MixedExponents,
    tol: f64,
    max_iter: usize,
    start: &Trajectory,
) -> Result<(Trajectory, PicardReport)> {
    let w0 = duhamel(&assemble_fv(v, cutoff)?, 0)?;
    start.check_compatible(&w0)?;
    iterate(v, &w0, start.clone(), exps, tol, max_iter)
}

fn iterate(
    v: &Trajectory,
    w0: &Trajectory,
    mut w: Trajectory,
    exps: &MixedExponents,
    tol: f64,
    max_iter: usize,
) -> Result<(Trajectory, PicardReport)> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::invalid("need tol > 0 and max_iter >= 1"));
    }
    let smallness = mixed_norm(v, exps, &Region::Whole)?;
    let mut differences = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        let next = picard_map(v, &w, w0)?;
        let diff = mixed_norm(&next.zip_frames(&w, |a, b| a.zip_with(b, |x, y| x - y))?, &sup_norm(), &Region::Whole)?;
        w = next;
        differences.push(diff);
        if !diff.is_finite() {
            break;
        }
        if diff < tol {
            converged = true;
            break;
        }
    }
    let ratios = differences
        .windows(2)
        .filter(|p| p[0] > 0.0)
        .map(|p| p[1] / p[0])
        .collect();
    Ok((
        w,
        PicardReport {
            iterates: differences.len(),
            differences,
            ratios,
            smallness,
            exponents: *exps,
            tolerance: tol,
            converged,
        },
    ))
}

/// `‖w - (-D₃[v w] + w₀)‖_{L^∞L^∞}`.
pub fn fixed_point_residual(v: &Trajectory, w: &Trajectory, cutoff: &CutoffFunction) -> Result<f64> {
    let w0 = duhamel(&assemble_fv(v, cutoff)?, 0)?;
    let image = picard_map(v, w, &w0)?;
    Ok(w.max_abs_diff(&image))
}

/// Consistency of `w` with `w_t + w_xxxx = -(w v)_xxx + f_v`, `w = 0` at the
/// first frame, measured two ways in `L^∞L^∞` and returned as the maximum:
///
/// * slab by slab, against the exponential test function `e^{-μ(t_{n+1} - s)}`
///   for each mode (variation of constants over `[t_n, t_{n+1}]`);
/// * globally, against the Duhamel reconstruction from the first frame.
pub fn representation_residual(w: &Trajectory, v: &Trajectory, cutoff: &CutoffFunction) -> Result<f64> {
    w.check_compatible(v)?;
    let fv = assemble_fv(v, cutoff)?;
    let wv = product(v, w)?;
    let (n, period) = (w.grid_size(), w.period());
    let mut slab = w.frames()[0].max_abs();
    if w.len() > 1 {
        let dt = w.dt();
        let coeffs: Vec<[f64; 3]> = (0..n)
            .map(|i| {
                let mu = (2.0 * std::f64::consts::PI * wavenumber(i, n) as f64 / period).powi(4);
                let [e, p1, p2, _] = phi(-mu * dt);
                [e, dt * (p1 - p2), dt * p2]
            })
            .collect();
        let rhs = |j: usize| -> Vec<Complex64> {
            let a = forward(&derivative(&wv.frames()[j], 3));
            let b = forward(&fv.frames()[j]);
            a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| y - x).collect()
        };
        let mut g_prev = rhs(0);
        for j in 0..w.len() - 1 {
            let g_next = rhs(j + 1);
            let a = forward(&w.frames()[j]);
            let b = forward(&w.frames()[j + 1]);
            let mismatch: Vec<Complex64> = (0..n)
                .map(|i| {
                    let [e, c0, c1] = coeffs[i];
                    b.coeffs()[i] - e * a.coeffs()[i] - c0 * g_prev[i] - c1 * g_next[i]
                })
                .collect();
            slab = slab.max(inverse(&SpectralField::new(mismatch, period)).max_abs());
            g_prev = g_next;
        }
    }
    let w0 = duhamel(&fv, 0)?;
    let global = w.max_abs_diff(&picard_map(v, w, &w0)?);
    Ok(slab.max(global))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ParabolicCylinder;
    use std::f64::consts::PI;

    fn setup(amp: f64) -> (Trajectory, CutoffFunction) {
        let v = Trajectory::from_fn(32, 1.0, 0.0, 1e-3, 41, |x, t| amp * (2.0 * PI * x).cos() * (1.0 + t)).unwrap();
        let q = ParabolicCylinder::new(0.5, 0.04, 0.4472).unwrap();
        let c = CutoffFunction::for_cylinder(&q, 1.0, 0.6).unwrap();
        (v, c)
    }

    #[test]
    fn zero_velocity_gives_immediate_fixed_point() {
        let (v, c) = setup(0.0);
        let exps = MixedExponents::finite(4.0, 8.0).unwrap();
        let (w, rep) = picard_solve(&v, &c, &exps, 1e-10, 10).unwrap();
        assert_eq!(rep.iterates, 1);
        assert!(rep.ratios.is_empty());
        assert!(rep.converged);
        assert_eq!(w.max_abs(), 0.0);
    }

    #[test]
    fn fv_vanishes_for_trivial_inputs() {
        let (v, c) = setup(0.0);
        assert_eq!(assemble_fv(&v, &c).unwrap().max_abs(), 0.0);
        let (v, _) = setup(1.0);
        assert_eq!(assemble_fv(&v, &CutoffFunction::whole()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn representation_residual_of_zero() {
        let (v, _) = setup(0.0);
        let r = representation_residual(&v, &v, &CutoffFunction::whole()).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn support_before_data_is_rejected() {
        let (v, _) = setup(1.0);
        let q = ParabolicCylinder::new(0.5, 0.02, 0.4472).unwrap();
        let c = CutoffFunction::for_cylinder(&q, 1.0, 0.6).unwrap();
        assert!(matches!(assemble_fv(&v, &c), Err(Error::Domain(_))));
    }
}
