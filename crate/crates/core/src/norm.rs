//! Discrete mixed Lebesgue norms `L^{q'}(I; L^q(B))` over space-time regions.
//!
//! Quadrature weights are chosen so that every rule is exact for constants on
//! any window, aligned with the grid or not:
//!
//! * space: each grid point carries the length of its cell `[x - h/2, x + h/2]`
//!   that falls inside the ball (uniform Riemann sum when the ball is the torus);
//! * time: each frame carries the integral of its piecewise-linear hat function
//!   over the time window (the trapezoid rule when the window is aligned).
//!
//! `∞` exponents take the maximum over the samples lying in the closed window.

use crate::error::{Error, Result};
use crate::exponent::{Exponent, MixedExponents};
use crate::field::{periodic_offset, ParabolicCylinder, Region, Trajectory};

const EDGE_TOL: f64 = 1e-9;

/// A trajectory sampled on a space-time window together with its quadrature weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    period: f64,
    spacing: f64,
    dt: f64,
    window: Option<ParabolicCylinder>,
    xs: Vec<f64>,
    x_weights: Vec<f64>,
    x_inside: Vec<bool>,
    times: Vec<f64>,
    t_weights: Vec<f64>,
    t_inside: Vec<bool>,
    /// `values[frame][point]`
    values: Vec<Vec<f64>>,
}

impl Patch {
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn x_weights(&self) -> &[f64] {
        &self.x_weights
    }

    pub fn t_weights(&self) -> &[f64] {
        &self.t_weights
    }

    pub fn frame_count(&self) -> usize {
        self.times.len()
    }

    /// Frames whose time lies in the closed window (the patch may also keep one
    /// neighbour on each side carrying partial interpolation weight).
    pub fn inside_frame_count(&self) -> usize {
        self.t_inside.iter().filter(|b| **b).count()
    }

    pub fn window(&self) -> Option<ParabolicCylinder> {
        self.window
    }

    /// Space-time measure of the window as seen by the quadrature.
    pub fn measure(&self) -> f64 {
        self.x_weights.iter().sum::<f64>() * self.t_weights.iter().sum::<f64>()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Patch {
        let mut out = self.clone();
        for row in &mut out.values {
            for v in row.iter_mut() {
                *v = f(*v);
            }
        }
        out
    }

    /// `∫∫ f` over the window.
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.t_weights)
            .map(|(row, wt)| wt * row.iter().zip(&self.x_weights).map(|(v, wx)| v * wx).sum::<f64>())
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.measure()
    }

    fn space_norm(&self, row: &[f64], q: Exponent) -> f64 {
        match q {
            Exponent::Infinite => row
                .iter()
                .zip(&self.x_inside)
                .filter(|(_, inside)| **inside)
                .fold(0.0_f64, |m, (v, _)| m.max(v.abs())),
            Exponent::Finite(q) => row
                .iter()
                .zip(&self.x_weights)
                .map(|(v, w)| w * v.abs().powf(q))
                .sum::<f64>()
                .powf(1.0 / q),
        }
    }

    /// The discrete `L^{q'}(I; L^q(B))` norm.
    pub fn mixed_norm(&self, exps: &MixedExponents) -> f64 {
        let inner: Vec<f64> = self
            .values
            .iter()
            .map(|row| self.space_norm(row, exps.space))
            .collect();
        match exps.time {
            Exponent::Infinite => inner
                .iter()
                .zip(&self.t_inside)
                .filter(|(_, inside)| **inside)
                .fold(0.0_f64, |m, (v, _)| m.max(*v)),
            Exponent::Finite(p) => inner
                .iter()
                .zip(&self.t_weights)
                .map(|(v, w)| w * v.powf(p))
                .sum::<f64>()
                .powf(1.0 / p),
        }
    }

    /// Restricts an already restricted patch to a smaller cylinder.
    pub fn restrict(&self, q: &ParabolicCylinder) -> Result<Patch> {
        match self.window {
            Some(outer) if !q.is_within(&outer, self.period) => {
                return Err(Error::domain("inner cylinder is not contained in the patch window"))
            }
            None => {
                let t0 = self.times[0];
                let t1 = self.times[self.times.len() - 1];
                check_cylinder_extent(q, self.period, t0, t1)?;
            }
            _ => {}
        }
        let t_start = self.times[0];
        let t_end = self.times[self.times.len() - 1];
        build_patch(
            self.period,
            self.spacing,
            self.dt,
            (t_start, t_end),
            q,
            &self.xs,
            &self.times,
            |n, j| self.values[n][j],
        )
    }
}

fn check_cylinder_extent(q: &ParabolicCylinder, period: f64, t_start: f64, t_end: f64) -> Result<()> {
    let span = (t_end - t_start).abs().max(1e-300);
    if 2.0 * q.radius > period * (1.0 + 1e-12) {
        return Err(Error::domain(format!(
            "cylinder diameter {} exceeds the period {period}",
            2.0 * q.radius
        )));
    }
    if q.bottom() < t_start - EDGE_TOL * span || q.top > t_end + EDGE_TOL * span {
        return Err(Error::domain(format!(
            "cylinder time window ({}, {}) outside trajectory extent ({t_start}, {t_end})",
            q.bottom(),
            q.top
        )));
    }
    Ok(())
}

/// Integral of the unit hat centred at 0 with half-width 1 over `(-∞, s]`.
fn hat_cdf(s: f64) -> f64 {
    if s <= -1.0 {
        0.0
    } else if s <= 0.0 {
        0.5 * (s + 1.0) * (s + 1.0)
    } else if s < 1.0 {
        1.0 - 0.5 * (1.0 - s) * (1.0 - s)
    } else {
        1.0
    }
}

fn cell_overlap(offset: f64, h: f64, r: f64, period: f64) -> f64 {
    [-period, 0.0, period]
        .iter()
        .map(|shift| {
            let lo = (offset + shift - 0.5 * h).max(-r);
            let hi = (offset + shift + 0.5 * h).min(r);
            (hi - lo).max(0.0)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn build_patch(
    period: f64,
    spacing: f64,
    dt: f64,
    (t_start, t_end): (f64, f64),
    q: &ParabolicCylinder,
    xs: &[f64],
    times: &[f64],
    value: impl Fn(usize, usize) -> f64,
) -> Result<Patch> {
    let r = q.radius;
    let x_tol = EDGE_TOL * spacing;
    let mut points = Vec::new();
    for (j, &x) in xs.iter().enumerate() {
        let d = periodic_offset(x - q.center, period);
        let w = cell_overlap(d, spacing, r, period);
        if w > 0.0 {
            points.push((j, x, w, d.abs() <= r + x_tol));
        }
    }

    let lo = q.bottom().max(t_start);
    let hi = q.top.min(t_end);
    let t_tol = EDGE_TOL * dt.max(1e-300);
    let mut frames = Vec::new();
    for (n, &t) in times.iter().enumerate() {
        let w = if dt > 0.0 {
            dt * (hat_cdf((hi - t) / dt) - hat_cdf((lo - t) / dt))
        } else {
            0.0
        };
        if w > 0.0 {
            frames.push((n, t, w, t >= q.bottom() - t_tol && t <= q.top + t_tol));
        }
    }
    let inside_frames = frames.iter().filter(|f| f.3).count();
    if inside_frames < 2 {
        return Err(Error::Resolution(format!(
            "only {inside_frames} frame(s) inside time window ({}, {}); need at least 2",
            q.bottom(),
            q.top
        )));
    }
    if !points.iter().any(|p| p.3) {
        return Err(Error::Resolution(format!(
            "no grid point inside the ball of radius {r} (spacing {spacing})"
        )));
    }

    Ok(Patch {
        period,
        spacing,
        dt,
        window: Some(*q),
        xs: points.iter().map(|p| p.1).collect(),
        x_weights: points.iter().map(|p| p.2).collect(),
        x_inside: points.iter().map(|p| p.3).collect(),
        times: frames.iter().map(|f| f.1).collect(),
        t_weights: frames.iter().map(|f| f.2).collect(),
        t_inside: frames.iter().map(|f| f.3).collect(),
        values: frames
            .iter()
            .map(|f| points.iter().map(|p| value(f.0, p.0)).collect())
            .collect(),
    })
}

/// Samples `traj` on a region, preserving the grid spacing.
pub fn restrict(traj: &Trajectory, region: &Region) -> Result<Patch> {
    let n = traj.grid_size();
    let period = traj.period();
    let spacing = period / n as f64;
    let xs: Vec<f64> = (0..n).map(|j| j as f64 * spacing).collect();
    let dt = traj.dt();
    match region {
        Region::Whole => {
            if traj.len() < 2 {
                return Err(Error::Resolution("whole-domain norm needs at least 2 frames".into()));
            }
            let m = traj.len();
            let t_weights = (0..m)
                .map(|i| if i == 0 || i == m - 1 { 0.5 * dt } else { dt })
                .collect();
            Ok(Patch {
                period,
                spacing,
                dt,
                window: None,
                xs,
                x_weights: vec![spacing; n],
                x_inside: vec![true; n],
                times: traj.times().to_vec(),
                t_weights,
                t_inside: vec![true; m],
                values: traj.frames().iter().map(|f| f.samples().to_vec()).collect(),
            })
        }
        Region::Cylinder(q) => {
            check_cylinder_extent(q, period, traj.start(), traj.end())?;
            build_patch(
                period,
                spacing,
                dt,
                (traj.start(), traj.end()),
                q,
                &xs,
                traj.times(),
                |f, j| traj.frames()[f].samples()[j],
            )
        }
    }
}

/// `‖f‖_{L^{q'}(I; L^q(B))}` of a trajectory over a region.
pub fn mixed_norm(traj: &Trajectory, exps: &MixedExponents, region: &Region) -> Result<f64> {
    Ok(restrict(traj, region)?.mixed_norm(exps))
}
