//! Exponential pseudospectral integration of `u_t + u_xxxx + (u_x²)_xx = 0`.
//!
//! The linear part is integrated exactly by the factor `e^{-(2πκ/L)⁴ dt}`; the
//! nonlinear term `-(u_x²)_xx` is advanced by fourth-order exponential
//! Runge-Kutta (Cox-Matthews) or by exponential Euler.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{GridField, Trajectory};
use crate::mild::CutoffFunction;
use crate::phi::phi;
use crate::spectral::{derivative, forward, inverse, wavenumber, SpectralField};

/// Amplitude beyond which a state is treated as blown up.
pub const DIVERGENCE_BOUND: f64 = 1e100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ExpRk4,
    ExpEuler,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::ExpRk4 => "exp-rk4",
            Scheme::ExpEuler => "exp-euler",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exp-rk4" | "etdrk4" => Ok(Scheme::ExpRk4),
            "exp-euler" | "etd1" => Ok(Scheme::ExpEuler),
            other => Err(Error::Parse(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    pub n: usize,
    pub period: f64,
    pub dt: f64,
    pub t_final: f64,
    pub dealias: bool,
    pub scheme: Scheme,
    /// When false only `u_t + u_xxxx = 0` is integrated.
    pub nonlinear: bool,
    /// Steps between stored frames.
    pub save_every: usize,
}

impl SolverConfig {
    /// Dealiased full equation with ETDRK4, saving every step.
    pub fn new(n: usize, period: f64, dt: f64, t_final: f64) -> Self {
        Self {
            n,
            period,
            dt,
            t_final,
            dealias: true,
            scheme: Scheme::ExpRk4,
            nonlinear: true,
            save_every: 1,
        }
    }

    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_save_every(mut self, k: usize) -> Self {
        self.save_every = k;
        self
    }

    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    /// Number of steps; `t_final` must be a whole multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        self.validate()?;
        Ok((self.t_final / self.dt).round() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || self.n % 2 != 0 {
            return Err(Error::invalid(format!("grid size must be even and >= 8, got {}", self.n)));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::invalid(format!("period must be positive, got {}", self.period)));
        }
        if !(self.dt > 0.0 && self.t_final > 0.0 && self.dt <= self.t_final) {
            return Err(Error::invalid(format!(
                "need 0 < dt <= T, got dt = {}, T = {}",
                self.dt, self.t_final
            )));
        }
        let steps = (self.t_final / self.dt).round();
        if (steps * self.dt - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(Error::invalid(format!(
                "T = {} is not a multiple of dt = {}",
                self.t_final, self.dt
            )));
        }
        if self.save_every == 0 || steps as usize % self.save_every != 0 {
            return Err(Error::invalid(format!(
                "save interval {} must divide the step count {steps}",
                self.save_every
            )));
        }
        Ok(())
    }
}

/// `-(u_x²)_xx` in coefficient space.
fn nonlinear_hat(u: &[Complex64], period: f64, dealias: bool) -> Vec<Complex64> {
    let n = u.len();
    let cut = (n / 3) as i64;
    let keep = |i: usize| !dealias || wavenumber(i, n).abs() <= cut;
    let theta = |i: usize| 2.0 * PI * wavenumber(i, n) as f64 / period;
    let ux: Vec<Complex64> = (0..n)
        .map(|i| {
            if i == n / 2 || !keep(i) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, theta(i)) * u[i]
            }
        })
        .collect();
    let ux = inverse(&SpectralField::new(ux, period));
    let sq = forward(&ux.map(|v| v * v));
    sq.coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| if keep(i) { c * theta(i).powi(2) } else { Complex64::new(0.0, 0.0) })
        .collect()
}

/// `-∂ₓₓ(u_x²)`, pseudospectral with the ⅔-rule.
pub fn rhs_nonlinear(u: &GridField) -> GridField {
    rhs_nonlinear_with(u, true)
}

pub fn rhs_nonlinear_with(u: &GridField, dealias: bool) -> GridField {
    let c = forward(u);
    inverse(&SpectralField::new(nonlinear_hat(c.coeffs(), u.period(), dealias), u.period()))
}

/// Per-mode exponential integrator coefficients for one step size.
pub struct Solver {
    config: SolverConfig,
    e: Vec<f64>,
    e_half: Vec<f64>,
    q_half: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
    euler: Vec<f64>,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let (n, h) = (config.n, config.dt);
        let mut s = Solver {
            e: Vec::with_capacity(n),
            e_half: Vec::with_capacity(n),
            q_half: Vec::with_capacity(n),
            f1: Vec::with_capacity(n),
            f2: Vec::with_capacity(n),
            f3: Vec::with_capacity(n),
            euler: Vec::with_capacity(n),
            config,
        };
        for i in 0..n {
            let mu = (2.0 * PI * wavenumber(i, n) as f64 / s.config.period).powi(4);
            let [e, p1, p2, p3] = phi(-mu * h);
            let [eh, ph1, _, _] = phi(-mu * h / 2.0);
            s.e.push(e);
            s.e_half.push(eh);
            s.q_half.push(0.5 * h * ph1);
            s.f1.push(h * (p1 - 3.0 * p2 + 4.0 * p3));
            s.f2.push(h * (p2 - 2.0 * p3));
            s.f3.push(h * (4.0 * p3 - p2));
            s.euler.push(h * p1);
        }
        Ok(s)
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn nl(&self, u: &[Complex64]) -> Vec<Complex64> {
        if self.config.nonlinear {
            nonlinear_hat(u, self.config.period, self.config.dealias)
        } else {
            vec![Complex64::new(0.0, 0.0); u.len()]
        }
    }

    fn step_hat(&self, u: &[Complex64]) -> Vec<Complex64> {
        let nu = self.nl(u);
        match self.config.scheme {
            Scheme::ExpEuler => (0..u.len()).map(|i| self.e[i] * u[i] + self.euler[i] * nu[i]).collect(),
            Scheme::ExpRk4 => {
                let a: Vec<Complex64> = (0..u.len()).map(|i| self.e_half[i] * u[i] + self.q_half[i] * nu[i]).collect();
                let na = self.nl(&a);
                let b: Vec<Complex64> = (0..u.len()).map(|i| self.e_half[i] * u[i] + self.q_half[i] * na[i]).collect();
                let nb = self.nl(&b);
                let c: Vec<Complex64> = (0..u.len())
                    .map(|i| self.e_half[i] * a[i] + self.q_half[i] * (2.0 * nb[i] - nu[i]))
                    .collect();
                let nc = self.nl(&c);
                (0..u.len())
                    .map(|i| {
                        self.e[i] * u[i] + self.f1[i] * nu[i] + 2.0 * self.f2[i] * (na[i] + nb[i]) + self.f3[i] * nc[i]
                    })
                    .collect()
            }
        }
    }

    /// One step from time `t`; a non-finite or overflowing result is reported as divergence at `t + dt`.
    pub fn step(&self, u: &GridField, t: f64) -> Result<GridField> {
        self.check_grid(u)?;
        let c = forward(u);
        let next = self.step_hat(c.coeffs());
        check_finite(&next, t + self.config.dt)?;
        Ok(inverse(&SpectralField::new(next, self.config.period)))
    }

    fn check_grid(&self, u: &GridField) -> Result<()> {
        if u.len() != self.config.n || (u.period() - self.config.period).abs() > 1e-12 * self.config.period {
            return Err(Error::shape(format!(
                "field grid (N={}, L={}) does not match solver (N={}, L={})",
                u.len(),
                u.period(),
                self.config.n,
                self.config.period
            )));
        }
        Ok(())
    }

    /// `dt · 2 max|u_x| · (2π κ_max / L)³`, the size of the linearized nonlinear
    /// frequency relative to the step.
    pub fn stability_number(&self, u: &GridField) -> f64 {
        let kmax = if self.config.dealias { self.config.n / 3 } else { self.config.n / 2 };
        let theta = 2.0 * PI * kmax as f64 / self.config.period;
        self.config.dt * 2.0 * derivative(u, 1).max_abs() * theta.powi(3)
    }

    pub fn simulate(&self, u0: &GridField) -> Result<Simulation> {
        self.check_grid(u0)?;
        if !u0.is_zero_mean() {
            return Err(Error::invalid(format!("initial data must have zero mean, got {}", u0.mean())));
        }
        let steps = self.config.steps()?;
        let every = self.config.save_every;
        let stability = self.stability_number(u0);
        let mut frames = vec![u0.clone()];
        let mut times = vec![0.0];
        let mut state = forward(u0).coeffs().to_vec();
        let mut divergence = None;
        for s in 0..steps {
            let next = self.step_hat(&state);
            let t = (s + 1) as f64 * self.config.dt;
            if check_finite(&next, t).is_err() {
                let last = frames.last().expect("at least one frame");
                divergence = Some(DivergenceInfo {
                    time: t,
                    last_finite_time: s as f64 * self.config.dt,
                    max_gradient: derivative(&inverse(&SpectralField::new(state.clone(), self.config.period)), 1)
                        .max_abs()
                        .max(derivative(last, 1).max_abs()),
                });
                break;
            }
            state = next;
            if (s + 1) % every == 0 {
                frames.push(inverse(&SpectralField::new(state.clone(), self.config.period)));
                times.push(t);
            }
        }
        Ok(Simulation {
            trajectory: Trajectory::new(frames, times)?,
            divergence,
            stability,
        })
    }
}

fn check_finite(c: &[Complex64], t: f64) -> Result<()> {
    if c.iter().all(|v| v.re.is_finite() && v.im.is_finite() && v.norm() < DIVERGENCE_BOUND) {
        Ok(())
    } else {
        Err(Error::Divergence { time: t })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DivergenceInfo {
    pub time: f64,
    pub last_finite_time: f64,
    /// `max|u_x|` of the last finite state.
    pub max_gradient: f64,
}

#[derive(Clone, Debug)]
pub struct Simulation {
    /// Frames up to the end time, or up to the last saved finite frame.
    pub trajectory: Trajectory,
    pub divergence: Option<DivergenceInfo>,
    /// See [`Solver::stability_number`], for the initial data.
    pub stability: f64,
}

impl Simulation {
    pub fn diverged(&self) -> bool {
        self.divergence.is_some()
    }
}

/// Runs `config` from `u0`.
pub fn simulate(u0: &GridField, config: &SolverConfig) -> Result<Simulation> {
    Solver::new(config.clone())?.simulate(u0)
}

/// `E = ½‖u‖²`, `D = ‖u_xx‖²`, `W = ∫ u_xx u_x²` at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub transfer: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub records: Vec<EnergyRecord>,
    /// `(t, |dE/dt + D + W|)` at every frame where the time derivative is formed.
    pub residuals: Vec<(f64, f64)>,
    pub max_dissipation: f64,
    pub max_residual: f64,
}

pub fn energy_record(u: &GridField, t: f64) -> EnergyRecord {
    let h = u.spacing();
    let ux = derivative(u, 1);
    let uxx = derivative(u, 2);
    EnergyRecord {
        t,
        energy: 0.5 * h * u.samples().iter().map(|v| v * v).sum::<f64>(),
        dissipation: h * uxx.samples().iter().map(|v| v * v).sum::<f64>(),
        transfer: h * uxx.samples().iter().zip(ux.samples()).map(|(a, b)| a * b * b).sum::<f64>(),
    }
}

/// Energy balance `dE/dt + D + W = 0` checked with a five-point time
/// derivative (three-point when fewer than five frames exist).
pub fn energy_report(traj: &Trajectory) -> Result<EnergyReport> {
    if traj.len() < 3 {
        return Err(Error::Resolution(format!(
            "energy report needs >= 3 frames, got {}",
            traj.len()
        )));
    }
    let records: Vec<EnergyRecord> = traj
        .frames()
        .iter()
        .zip(traj.times())
        .map(|(f, &t)| energy_record(f, t))
        .collect();
    let dt = traj.dt();
    let e: Vec<f64> = records.iter().map(|r| r.energy).collect();
    let m = records.len();
    let (lo, hi) = if m >= 5 { (2, m - 2) } else { (1, m - 1) };
    let residuals: Vec<(f64, f64)> = (lo..hi)
        .map(|j| {
            let de = if m >= 5 {
                (-e[j + 2] + 8.0 * e[j + 1] - 8.0 * e[j - 1] + e[j - 2]) / (12.0 * dt)
            } else {
                (e[j + 1] - e[j - 1]) / (2.0 * dt)
            };
            (records[j].t, (de + records[j].dissipation + records[j].transfer).abs())
        })
        .collect();
    let max_dissipation = records.iter().fold(0.0_f64, |a, r| a.max(r.dissipation));
    let max_residual = residuals.iter().fold(0.0_f64, |a, r| a.max(r.1));
    Ok(EnergyReport {
        records,
        residuals,
        max_dissipation,
        max_residual,
    })
}

/// `|∫∫ u φ_t - u_xx φ_xx - u_x² φ_xx|`: spatial sum on the periodic grid,
/// trapezoid rule over the frames.
pub fn weak_form_residual(traj: &Trajectory, phi: &CutoffFunction) -> Result<f64> {
    weak_form_residual_with(traj, phi, true)
}

/// As [`weak_form_residual`]; with `nonlinear = false` the `u_x²` term is
/// dropped, which is the weak form of `u_t + u_xxxx = 0`.
pub fn weak_form_residual_with(traj: &Trajectory, phi: &CutoffFunction, nonlinear: bool) -> Result<f64> {
    let (lo, hi) = phi.time_support();
    if !(lo > traj.start() && hi < traj.end()) {
        return Err(Error::domain(format!(
            "test function support ({lo}, {hi}) is not inside ({}, {})",
            traj.start(),
            traj.end()
        )));
    }
    phi.check_support(traj.period(), traj.start())?;
    let (n, period) = (traj.grid_size(), traj.period());
    let h = period / n as f64;
    let dt = traj.dt();
    let mut total = 0.0;
    for (j, (u, &t)) in traj.frames().iter().zip(traj.times()).enumerate() {
        let w = if j == 0 || j + 1 == traj.len() { 0.5 * dt } else { dt };
        let [chi, dchi] = phi.time_derivatives(t);
        if chi == 0.0 && dchi == 0.0 {
            continue;
        }
        let ux = derivative(u, 1);
        let uxx = derivative(u, 2);
        let mut s = 0.0;
        for i in 0..n {
            let d = phi.space_derivatives(i as f64 * h);
            let (a, b, c) = (u.samples()[i], uxx.samples()[i], ux.samples()[i]);
            let q = if nonlinear { c * c } else { 0.0 };
            s += a * d[0] * dchi - (b + q) * d[2] * chi;
        }
        total += w * h * s;
    }
    Ok(total.abs())
}
