//! Regularity diagnostics: `Y(z, r) = r⁻² ∫_{Q(z,r)} |u_x|³`, parabolic Poincaré
//! ratios, Serrin norms of `u_x` and the census of cylinders with `Y ≥ ε₀`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::{Criticality, MixedExponents};
use crate::field::{ParabolicCylinder, Region, Trajectory};
use crate::kernel::log_log_slope;
use crate::norm::{mixed_norm, restrict};
use crate::spectral::derivative;

/// Default threshold `ε₀`. Its value is arbitrary.
pub const DEFAULT_EPS0: f64 = 0.1;

/// `u_x` frame by frame, spectrally.
pub fn gradient(traj: &Trajectory) -> Result<Trajectory> {
    traj.map_frames(|f| Ok(derivative(f, 1)))
}

/// `Y(z, r)` from a precomputed gradient trajectory.
pub fn local_y_from_gradient(grad: &Trajectory, q: &ParabolicCylinder) -> Result<f64> {
    let patch = restrict(grad, &Region::Cylinder(*q))?;
    Ok(patch.map(|v| v.abs().powi(3)).integral() / (q.radius * q.radius))
}

pub fn local_y(traj: &Trajectory, q: &ParabolicCylinder) -> Result<f64> {
    local_y_from_gradient(&gradient(traj)?, q)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum PoincareVariant {
    /// `r⁻⁵ ∫_{Q(z,r/2)} |u - ū|³` against `Y + Y²`.
    Cubic,
    /// `r⁻⁵ ∫_{Q(z,r/2)} |u - ū|^p` against `(r^ε M)^p + (r^ε M)^{2p}`, with
    /// `M = ‖u_x‖_{L^{p'}L^p(Q(z,r))}` and `1/p + 4/p' = 1 - ε`.
    Generalized { p: f64, p_time: f64, eps: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoincareReport {
    pub lhs: f64,
    pub y: f64,
    /// Right-hand side without the constant.
    pub rhs: f64,
    /// `lhs / rhs`; 0 when both vanish, infinite when only `rhs` does.
    pub ratio: f64,
}

pub fn poincare_residual(traj: &Trajectory, q: &ParabolicCylinder, variant: PoincareVariant) -> Result<PoincareReport> {
    let grad = gradient(traj)?;
    poincare_residual_with_gradient(traj, &grad, q, variant)
}

/// As [`poincare_residual`] with `u_x` supplied.
pub fn poincare_residual_with_gradient(
    traj: &Trajectory,
    grad: &Trajectory,
    q: &ParabolicCylinder,
    variant: PoincareVariant,
) -> Result<PoincareReport> {
    let half = restrict(traj, &Region::Cylinder(q.shrink(0.5)))?;
    let mean = half.mean();
    let y = local_y_from_gradient(grad, q)?;
    let r = q.radius;
    let (p, rhs) = match variant {
        PoincareVariant::Cubic => (3.0, y + y * y),
        PoincareVariant::Generalized { p, p_time, eps } => {
            if !(p >= 2.0 && p.is_finite() && p_time >= 2.0 && p_time.is_finite()) {
                return Err(Error::invalid(format!("need p, p' in [2, ∞), got ({p}, {p_time})")));
            }
            if ((1.0 / p + 4.0 / p_time) - (1.0 - eps)).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "1/p + 4/p' = {} differs from 1 - ε = {}",
                    1.0 / p + 4.0 / p_time,
                    1.0 - eps
                )));
            }
            let exps = MixedExponents::finite(p, p_time)?;
            let m = mixed_norm(grad, &exps, &Region::Cylinder(*q))?;
            let s = r.powf(eps) * m;
            (p, s.powf(p) + s.powf(2.0 * p))
        }
    };
    let lhs = half.map(|v| (v - mean).abs().powf(p)).integral() / r.powi(5);
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(PoincareReport { lhs, y, rhs, ratio })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SerrinReport {
    pub norm: f64,
    pub index: f64,
    pub class: Criticality,
}

/// `‖u_x‖_{L^{q'}L^q}` over `region` and the criticality of `(q, q')`.
pub fn serrin_monitor(traj: &Trajectory, exps: &MixedExponents, region: &Region) -> Result<SerrinReport> {
    let norm = mixed_norm(&gradient(traj)?, exps, region)?;
    let (index, class) = exps.criticality();
    Ok(SerrinReport { norm, index, class })
}

/// `Y` next to its Hölder bound `‖u_x‖³_{L^{q'}L^q(Q)} · 2^{1-3/q} · r^{3(1-1/q-4/q')}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolderCheck {
    pub y: f64,
    pub bound: f64,
}

impl HolderCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.y <= self.bound * (1.0 + slack)
    }
}

/// The factor `2^{1-3/q}` is `|B|^{1-3/q} / r^{1-3/q}`; it is `≤ 1` only for `q ≤ 3`.
pub fn serrin_y_bound(grad: &Trajectory, q: &ParabolicCylinder, exps: &MixedExponents) -> Result<HolderCheck> {
    if exps.space.value() < 3.0 || exps.time.value() < 3.0 {
        return Err(Error::invalid(format!("Hölder bound needs q, q' >= 3, got {exps}")));
    }
    let y = local_y_from_gradient(grad, q)?;
    let norm = mixed_norm(grad, exps, &Region::Cylinder(*q))?;
    let inv_q = exps.space.recip();
    let bound = norm.powi(3)
        * 2f64.powf(1.0 - 3.0 * inv_q)
        * q.radius.powf(3.0 * (1.0 - inv_q - 4.0 * exps.time.recip()));
    Ok(HolderCheck { y, bound })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CensusEntry {
    pub center: f64,
    pub top: f64,
    pub radius: f64,
    pub y: f64,
    /// `Y < ε₀`.
    pub good: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CylinderCensus {
    pub radius: f64,
    pub eps0: f64,
    pub entries: Vec<CensusEntry>,
    pub good: usize,
    pub bad: usize,
}

/// Centers `x₀ = i·stride·r/2`, tops `t₀ = t_start + r⁴ + j·stride·r⁴/2`.
pub fn census_lattice(traj: &Trajectory, r: f64, stride: usize) -> Result<Vec<ParabolicCylinder>> {
    let extent = traj.end() - traj.start();
    let h = r.powi(4);
    if !(r > 0.0) || h >= extent || 2.0 * r > traj.period() || stride == 0 {
        return Err(Error::domain(format!(
            "census radius {r} needs r⁴ < {extent}, 2r <= {} and stride >= 1",
            traj.period()
        )));
    }
    let dx = 0.5 * r * stride as f64;
    let dt = 0.5 * h * stride as f64;
    let nx = (traj.period() / dx - 1e-9).ceil() as usize;
    let tol = 1e-9 * extent;
    let nt = ((extent - h + tol) / dt).floor() as usize + 1;
    let mut out = Vec::with_capacity(nx * nt);
    for j in 0..nt {
        for i in 0..nx {
            out.push(ParabolicCylinder::new(
                i as f64 * dx,
                (traj.start() + h + j as f64 * dt).min(traj.end()),
                r,
            )?);
        }
    }
    Ok(out)
}

pub fn cylinder_census(traj: &Trajectory, r: f64, eps0: f64, stride: usize) -> Result<CylinderCensus> {
    census_from_gradient(&gradient(traj)?, r, eps0, stride)
}

pub fn census_from_gradient(grad: &Trajectory, r: f64, eps0: f64, stride: usize) -> Result<CylinderCensus> {
    let cylinders = census_lattice(grad, r, stride)?;
    let entries = cylinders
        .par_iter()
        .map(|q| {
            let y = local_y_from_gradient(grad, q)?;
            Ok(CensusEntry {
                center: q.center,
                top: q.top,
                radius: r,
                y,
                good: y < eps0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let good = entries.iter().filter(|e| e.good).count();
    Ok(CylinderCensus {
        radius: r,
        eps0,
        bad: entries.len() - good,
        good,
        entries,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusSweep {
    pub censuses: Vec<CylinderCensus>,
    /// Least-squares slope of `log(bad count)` against `log(1/r)` over radii
    /// with at least one bad cylinder; `None` with fewer than two such radii.
    pub slope: Option<f64>,
}

pub fn census_sweep(traj: &Trajectory, radii: &[f64], eps0: f64, stride: usize) -> Result<CensusSweep> {
    let grad = gradient(traj)?;
    let censuses = radii
        .iter()
        .map(|&r| census_from_gradient(&grad, r, eps0, stride))
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = censuses
        .iter()
        .filter(|c| c.bad > 0)
        .map(|c| (1.0 / c.radius, c.bad as f64))
        .collect();
    let slope = (pts.len() >= 2).then(|| log_log_slope(&pts));
    Ok(CensusSweep { censuses, slope })
}

/// `Y ≤ 2 (max_Q |u_x|)³ r³`.
pub fn y_upper_bound(max_gradient: f64, r: f64) -> f64 {
    2.0 * max_gradient.powi(3) * r.powi(3)
}
