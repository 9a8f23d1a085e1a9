//! Periodic fields, trajectories and parabolic cylinders.

use crate::error::{Error, Result};

/// Relative spacing tolerance for the uniform time grid of a [`Trajectory`].
pub const TIME_GRID_RTOL: f64 = 1e-12;

/// One periodic field sampled on the uniform grid `x_j = j L / N`, `j = 0..N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    samples: Vec<f64>,
    period: f64,
}

impl GridField {
    pub const MIN_POINTS: usize = 8;

    pub fn new(samples: Vec<f64>, period: f64) -> Result<Self> {
        let n = samples.len();
        if n < Self::MIN_POINTS || n % 2 != 0 {
            return Err(Error::shape(format!(
                "grid size must be even and at least {}, got {n}",
                Self::MIN_POINTS
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::invalid(format!("period must be positive, got {period}")));
        }
        Ok(Self { samples, period })
    }

    /// Like [`GridField::new`] but also checks the zero-mean flag
    /// `|mean| <= 1e-12 max(1, max|f|)`.
    pub fn new_zero_mean(samples: Vec<f64>, period: f64) -> Result<Self> {
        let field = Self::new(samples, period)?;
        if !field.is_zero_mean() {
            return Err(Error::invalid(format!(
                "field is flagged zero-mean but has mean {:e}",
                field.mean()
            )));
        }
        Ok(field)
    }

    pub fn zeros(n: usize, period: f64) -> Result<Self> {
        Self::new(vec![0.0; n], period)
    }

    pub fn from_fn(n: usize, period: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = period / n as f64;
        Self::new((0..n).map(|j| f(j as f64 * h)).collect(), period)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.samples.len() as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero_mean(&self) -> bool {
        self.mean().abs() <= 1e-12 * self.max_abs().max(1.0)
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    /// Riemann-sum L² norm over the full period.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|v| v * v).sum::<f64>() * self.spacing()).sqrt()
    }

    pub fn same_grid(&self, other: &GridField) -> bool {
        self.len() == other.len() && self.period == other.period
    }

    pub(crate) fn check_same_grid(&self, other: &GridField) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::shape(format!(
                "grids differ: (N={}, L={}) vs (N={}, L={})",
                self.len(),
                self.period,
                other.len(),
                other.period
            )))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField {
            samples: self.samples.iter().map(|&v| f(v)).collect(),
            period: self.period,
        }
    }

    pub fn zip_with(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<GridField> {
        self.check_same_grid(other)?;
        Ok(GridField {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            period: self.period,
        })
    }

    pub fn scale(&self, c: f64) -> GridField {
        self.map(|v| c * v)
    }

    pub fn max_abs_diff(&self, other: &GridField) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// A uniform-in-time sequence of fields on a shared periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    frames: Vec<GridField>,
    times: Vec<f64>,
}

impl Trajectory {
    pub fn new(frames: Vec<GridField>, times: Vec<f64>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::shape("trajectory needs at least one frame"));
        }
        if frames.len() != times.len() {
            return Err(Error::shape(format!(
                "{} frames but {} times",
                frames.len(),
                times.len()
            )));
        }
        let first = &frames[0];
        if let Some(bad) = frames.iter().find(|f| !f.same_grid(first)) {
            return Err(Error::shape(format!(
                "frame grid (N={}, L={}) differs from first frame (N={}, L={})",
                bad.len(),
                bad.period(),
                first.len(),
                first.period()
            )));
        }
        if times.len() > 1 {
            let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
            if !(dt > 0.0) {
                return Err(Error::invalid("times must be strictly increasing"));
            }
            for (i, &t) in times.iter().enumerate() {
                let expected = times[0] + i as f64 * dt;
                if (t - expected).abs() > TIME_GRID_RTOL * (times[0].abs() + i as f64 * dt).max(dt) {
                    return Err(Error::invalid(format!(
                        "time grid is not uniform at index {i}: {t} vs {expected}"
                    )));
                }
            }
        }
        Ok(Self { frames, times })
    }

    /// Samples `f(x, t)` on an `n`-point grid at the times `t0 + i dt`, `i = 0..frames`.
    pub fn from_fn(
        n: usize,
        period: f64,
        t0: f64,
        dt: f64,
        frames: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let times: Vec<f64> = (0..frames).map(|i| t0 + i as f64 * dt).collect();
        let fields = times
            .iter()
            .map(|&t| GridField::from_fn(n, period, |x| f(x, t)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(fields, times)
    }

    pub fn frames(&self) -> &[GridField] {
        &self.frames
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn grid_size(&self) -> usize {
        self.frames[0].len()
    }

    pub fn period(&self) -> f64 {
        self.frames[0].period()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Frame spacing; zero for single-frame trajectories.
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            (self.end() - self.start()) / (self.times.len() - 1) as f64
        }
    }

    pub fn last(&self) -> &GridField {
        &self.frames[self.frames.len() - 1]
    }

    /// Applies `f` frame by frame, keeping the time grid.
    pub fn map_frames(&self, f: impl Fn(&GridField) -> Result<GridField>) -> Result<Trajectory> {
        let frames = self.frames.iter().map(f).collect::<Result<Vec<_>>>()?;
        Trajectory::new(frames, self.times.clone())
    }

    pub fn zip_frames(
        &self,
        other: &Trajectory,
        f: impl Fn(&GridField, &GridField) -> Result<GridField>,
    ) -> Result<Trajectory> {
        self.check_compatible(other)?;
        let frames = self
            .frames
            .iter()
            .zip(&other.frames)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(frames, self.times.clone())
    }

    pub fn check_compatible(&self, other: &Trajectory) -> Result<()> {
        if self.len() != other.len()
            || self.grid_size() != other.grid_size()
            || self.period() != other.period()
        {
            return Err(Error::shape("trajectories have different grids"));
        }
        let tol = 1e-12 * self.end().abs().max(1.0);
        if self
            .times
            .iter()
            .zip(&other.times)
            .any(|(a, b)| (a - b).abs() > tol)
        {
            return Err(Error::shape("trajectories have different time grids"));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.frames.iter().fold(0.0_f64, |m, f| m.max(f.max_abs()))
    }

    pub fn max_abs_diff(&self, other: &Trajectory) -> f64 {
        self.frames
            .iter()
            .zip(&other.frames)
            .fold(0.0_f64, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    pub fn scale(&self, c: f64) -> Trajectory {
        Trajectory {
            frames: self.frames.iter().map(|f| f.scale(c)).collect(),
            times: self.times.clone(),
        }
    }
}

/// The backward cylinder `B(x0, r) × (t0 - r⁴, t0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParabolicCylinder {
    pub center: f64,
    pub top: f64,
    pub radius: f64,
}

impl ParabolicCylinder {
    pub fn new(center: f64, top: f64, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(format!("cylinder radius must be positive, got {radius}")));
        }
        if !center.is_finite() || !top.is_finite() {
            return Err(Error::invalid("cylinder center must be finite"));
        }
        Ok(Self { center, top, radius })
    }

    pub fn height(&self) -> f64 {
        self.radius.powi(4)
    }

    pub fn bottom(&self) -> f64 {
        self.top - self.height()
    }

    /// Space-time measure `2r · r⁴`.
    pub fn volume(&self) -> f64 {
        2.0 * self.radius.powi(5)
    }

    /// The concentric cylinder with the same top and radius scaled by `factor`.
    pub fn shrink(&self, factor: f64) -> ParabolicCylinder {
        ParabolicCylinder {
            center: self.center,
            top: self.top,
            radius: self.radius * factor,
        }
    }

    /// Whether `self` is contained in `other` on a torus of length `period`.
    pub fn is_within(&self, other: &ParabolicCylinder, period: f64) -> bool {
        let d = periodic_offset(self.center - other.center, period).abs();
        d + self.radius <= other.radius * (1.0 + 1e-12)
            && self.top <= other.top + 1e-12
            && self.bottom() >= other.bottom() - 1e-12
    }
}

/// Space-time region for norms and restrictions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    /// The full torus over the full time span of the trajectory.
    Whole,
    Cylinder(ParabolicCylinder),
}

impl From<ParabolicCylinder> for Region {
    fn from(c: ParabolicCylinder) -> Self {
        Region::Cylinder(c)
    }
}

/// Wraps `d` into `[-L/2, L/2)`.
pub fn periodic_offset(d: f64, period: f64) -> f64 {
    let half = 0.5 * period;
    let mut w = (d + half).rem_euclid(period) - half;
    if w >= half {
        w -= period;
    }
    w
}
