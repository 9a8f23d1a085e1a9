//! Parabolic mollification: a bump of width `ε` in `x` and `ε⁴` in `t`.
//!
//! The spatial kernel is a discrete, nonnegative circulant of unit mass. The
//! temporal operator `A` has off-diagonal entries `β(t_n - t_j) w_j` (trapezoid
//! weights `w_j`) and the missing mass on the diagonal, so `A` is row-stochastic
//! and `w_n A_{nj} = w_j A_{jn}`. Both properties together give
//! `‖A f‖_{p,w} ≤ ‖f‖_{p,w}` for every `p`, hence mixed norms cannot grow.

use crate::error::{Error, Result};
use crate::exponent::MixedExponents;
use crate::field::{GridField, Region, Trajectory};
use crate::norm::mixed_norm;

/// Relative slack allowed when checking that mollification did not increase a norm.
pub const NORM_SLACK: f64 = 1e-10;

fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

fn spatial_weights(n: usize, h: f64, eps: f64) -> Vec<(isize, f64)> {
    let reach = (eps / h).ceil() as isize;
    let raw: Vec<(isize, f64)> = (-reach..=reach)
        .map(|j| (j, bump(j as f64 * h / eps)))
        .filter(|(_, w)| *w > 0.0)
        .collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    if total == 0.0 || raw.len() as isize > n as isize {
        return vec![(0, 1.0)];
    }
    raw.into_iter().map(|(j, w)| (j, w / total)).collect()
}

fn smooth_space(f: &GridField, weights: &[(isize, f64)]) -> GridField {
    let n = f.len() as isize;
    let s = f.samples();
    let out = (0..n)
        .map(|i| weights.iter().map(|&(j, w)| w * s[(i - j).rem_euclid(n) as usize]).sum())
        .collect();
    GridField::new(out, f.period()).expect("same grid")
}

/// Mollifies `v` with spatial width `eps` and temporal width `eps⁴`.
pub fn mollify(v: &Trajectory, eps: f64) -> Result<Trajectory> {
    let extent = v.end() - v.start();
    if !(eps > 0.0) || eps > 0.25 * v.period() || eps.powi(4) > 0.25 * extent {
        return Err(Error::domain(format!(
            "mollifier width {eps} too large for period {} and time extent {extent}",
            v.period()
        )));
    }
    let weights = spatial_weights(v.grid_size(), v.period() / v.grid_size() as f64, eps);
    let spaced: Vec<GridField> = v.frames().iter().map(|f| smooth_space(f, &weights)).collect();

    let m = v.len();
    let dt = v.dt();
    let tau = eps.powi(4);
    let tw: Vec<f64> = (0..m)
        .map(|j| if j == 0 || j + 1 == m { 0.5 * dt } else { dt })
        .collect();
    let reach = if dt > 0.0 { (tau / dt).ceil() as usize } else { 0 };
    let beta = |d: usize| bump(d as f64 * dt / tau);
    let row_mass = |n: usize| -> f64 {
        let lo = n.saturating_sub(reach);
        let hi = (n + reach).min(m - 1);
        (lo..=hi).map(|j| beta(n.abs_diff(j)) * tw[j]).sum()
    };
    let scale = (0..m).map(row_mass).fold(0.0_f64, f64::max);
    let n_pts = v.grid_size();
    let mut frames = Vec::with_capacity(m);
    for n in 0..m {
        let lo = n.saturating_sub(reach);
        let hi = (n + reach).min(m - 1);
        let mut out = vec![0.0; n_pts];
        let mut off = 0.0;
        for j in lo..=hi {
            if j == n {
                continue;
            }
            let a = beta(n.abs_diff(j)) * tw[j] / scale;
            if a == 0.0 {
                continue;
            }
            off += a;
            for (o, x) in out.iter_mut().zip(spaced[j].samples()) {
                *o += a * x;
            }
        }
        let diag = 1.0 - off;
        for (o, x) in out.iter_mut().zip(spaced[n].samples()) {
            *o += diag * x;
        }
        frames.push(GridField::new(out, v.period())?);
    }
    Trajectory::new(frames, v.times().to_vec())
}

/// Mollified field with the norms before and after.
#[derive(Clone, Debug)]
pub struct Mollified {
    pub field: Trajectory,
    pub norm_before: f64,
    pub norm_after: f64,
}

/// [`mollify`], then checks that `‖·‖_{exps}` over the whole trajectory did not grow.
pub fn mollify_checked(v: &Trajectory, eps: f64, exps: &MixedExponents) -> Result<Mollified> {
    let field = mollify(v, eps)?;
    let norm_before = mixed_norm(v, exps, &Region::Whole)?;
    let norm_after = mixed_norm(&field, exps, &Region::Whole)?;
    if norm_after > norm_before * (1.0 + NORM_SLACK) + f64::MIN_POSITIVE {
        return Err(Error::Accuracy(format!(
            "mollification increased {exps} from {norm_before} to {norm_after}"
        )));
    }
    Ok(Mollified {
        field,
        norm_before,
        norm_after,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::Exponent;
    use std::f64::consts::PI;

    #[test]
    fn constants_are_fixed() {
        let v = Trajectory::from_fn(32, 1.0, 0.0, 1e-3, 50, |_, _| 2.5).unwrap();
        let m = mollify(&v, 0.2).unwrap();
        assert!(m.max_abs_diff(&v) < 1e-14);
    }

    #[test]
    fn norms_do_not_grow() {
        let v = Trajectory::from_fn(64, 1.0, 0.0, 1e-3, 60, |x, t| {
            (2.0 * PI * 7.0 * x).sin().signum() * (1.0 + (300.0 * t).cos())
        })
        .unwrap();
        for exps in [
            MixedExponents::finite(2.0, 2.0).unwrap(),
            MixedExponents::finite(4.0, 8.0).unwrap(),
            MixedExponents::diagonal(Exponent::Infinite),
            MixedExponents::finite(1.0, 3.0).unwrap(),
        ] {
            mollify_checked(&v, 0.15, &exps).unwrap();
        }
    }

    #[test]
    fn too_wide_is_rejected() {
        let v = Trajectory::from_fn(32, 1.0, 0.0, 1e-3, 10, |_, _| 0.0).unwrap();
        assert!(matches!(mollify(&v, 0.3), Err(Error::Domain(_))));
        assert!(matches!(mollify(&v, 0.25), Err(Error::Domain(_))));
    }
}
