//! Empirical constants in `‖D_k f‖_{L^{r'}L^r} ≤ C ‖f‖_{L^{l'}L^l}` on the torus,
//! where `D_k f(t) = ∫₀ᵗ ∂ₓᵏΦ(t - s) ∗ f(s) ds`.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::{Exponent, MixedExponents};
use crate::field::{periodic_offset, Region, Trajectory};
use crate::norm::mixed_norm;

use super::duhamel::{duhamel, MAX_DUHAMEL_ORDER};

/// Minimum number of random sources per scale.
pub const MIN_TRIALS: usize = 10;
/// Largest accepted growth of the maximal ratio between consecutive scales.
pub const STABILITY_GROWTH: f64 = 0.10;

/// `k` together with source exponents `(l, l')` and target exponents `(r, r')`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quadruple {
    pub k: u32,
    pub l: Exponent,
    pub l_time: Exponent,
    pub r: Exponent,
    pub r_time: Exponent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateRegime {
    /// `1/l + 4/l' < 1/r + 4/r' + (4 - k)`.
    Strict,
    /// Equality in the index relation with `1 < l' < r' < ∞`.
    Borderline,
    /// Neither condition holds; the ratio is only reported.
    UnboundedProbe,
}

impl fmt::Display for EstimateRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimateRegime::Strict => "strict",
            EstimateRegime::Borderline => "borderline",
            EstimateRegime::UnboundedProbe => "unbounded-regime probe",
        })
    }
}

impl Quadruple {
    pub fn new(k: u32, l: Exponent, l_time: Exponent, r: Exponent, r_time: Exponent) -> Result<Self> {
        if k > MAX_DUHAMEL_ORDER {
            return Err(Error::domain(format!("derivative order {k} > {MAX_DUHAMEL_ORDER}")));
        }
        Ok(Self { k, l, l_time, r, r_time })
    }

    /// Parses `"k; l, l', r, r'"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (k, rest) = s
            .split_once(';')
            .ok_or_else(|| Error::Parse(format!("expected \"k; l, l', r, r'\", got {s:?}")))?;
        let k: u32 = k.trim().parse().map_err(|_| Error::Parse(format!("bad order in {s:?}")))?;
        let e = rest
            .split(',')
            .map(|p| p.parse::<Exponent>())
            .collect::<Result<Vec<_>>>()?;
        if e.len() != 4 {
            return Err(Error::Parse(format!("expected four exponents in {s:?}")));
        }
        Self::new(k, e[0], e[1], e[2], e[3])
    }

    pub fn source(&self) -> MixedExponents {
        MixedExponents::new(self.l, self.l_time)
    }

    pub fn target(&self) -> MixedExponents {
        MixedExponents::new(self.r, self.r_time)
    }

    /// `1/r + 4/r' + (4 - k) - (1/l + 4/l')`.
    pub fn margin(&self) -> f64 {
        self.target().index() + (4.0 - self.k as f64) - self.source().index()
    }

    pub fn regime(&self) -> EstimateRegime {
        let ordered = self.l.value() <= self.r.value() && self.l_time.value() <= self.r_time.value();
        let m = self.margin();
        if ordered && m > 1e-12 {
            EstimateRegime::Strict
        } else if ordered
            && m >= -1e-12
            && self.l_time.value() > 1.0
            && self.l_time.value() < self.r_time.value()
            && !self.r_time.is_infinite()
        {
            EstimateRegime::Borderline
        } else {
            EstimateRegime::UnboundedProbe
        }
    }
}

impl fmt::Display for Quadruple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}; {}, {}, {}, {}", self.k, self.l, self.l_time, self.r, self.r_time)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceFamily {
    Noise,
    Bump,
    NearSingular,
}

/// Resolution ladder and sampling for the estimate study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateConfig {
    pub period: f64,
    pub duration: f64,
    pub base_n: usize,
    pub base_frames: usize,
    /// Number of grids; each doubles both `N` and the frame count.
    pub levels: usize,
    pub trials: usize,
    pub seed: u64,
    /// Offset `ε` in the near-singular profile `(|x - x₀| + ε)^{-β}`.
    pub singular_offset: f64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            period: 1.0,
            duration: 0.02,
            base_n: 64,
            base_frames: 32,
            levels: 3,
            trials: 12,
            seed: 7,
            singular_offset: 0.01,
        }
    }
}

impl EstimateConfig {
    fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::invalid(format!("need at least {MIN_TRIALS} trials, got {}", self.trials)));
        }
        if self.levels == 0 || self.base_frames < 2 || self.base_n < 8 || self.base_n % 2 != 0 {
            return Err(Error::invalid("estimate ladder needs levels >= 1, frames >= 2, even N >= 8"));
        }
        if !(self.period > 0.0 && self.duration > 0.0 && self.singular_offset > 0.0) {
            return Err(Error::invalid("period, duration and offset must be positive"));
        }
        Ok(())
    }

    /// `(N, frames)` per level.
    pub fn scales(&self) -> Vec<(usize, usize)> {
        (0..self.levels)
            .map(|i| (self.base_n << i, ((self.base_frames - 1) << i) + 1))
            .collect()
    }
}

/// One random source, a closed-form function of `(x, t)`.
#[derive(Clone, Debug)]
struct Source {
    family: SourceFamily,
    coeffs: Vec<(f64, f64)>,
    center: f64,
    width: f64,
    t_center: f64,
    t_width: f64,
    exponent: f64,
    freq: f64,
    phase: f64,
}

impl Source {
    fn draw(cfg: &EstimateConfig, trial: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(trial as u64);
        let family = match trial % 3 {
            0 => SourceFamily::Noise,
            1 => SourceFamily::Bump,
            _ => SourceFamily::NearSingular,
        };
        let (l, t) = (cfg.period, cfg.duration);
        // Centers sit on the coarsest grid so every level samples the peak.
        let center = l * rng.gen_range(0..cfg.base_n) as f64 / cfg.base_n as f64;
        Source {
            family,
            coeffs: (1..=6)
                .map(|k| (rng.gen_range(-1.0..1.0) / k as f64, rng.gen_range(0.0..2.0 * PI)))
                .collect(),
            center,
            width: l * rng.gen_range(0.05..0.15),
            t_center: t * rng.gen_range(0.2..0.8),
            t_width: t * rng.gen_range(0.1..0.3),
            exponent: rng.gen_range(0.2..0.45),
            freq: rng.gen_range(0.5..2.0),
            phase: rng.gen_range(0.0..2.0 * PI),
        }
    }

    fn eval(&self, x: f64, t: f64, cfg: &EstimateConfig) -> f64 {
        let (l, big_t) = (cfg.period, cfg.duration);
        let envelope = 1.0 + 0.5 * (2.0 * PI * self.freq * t / big_t + self.phase).sin();
        match self.family {
            SourceFamily::Noise => {
                let s: f64 = self
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, (a, p))| a * (2.0 * PI * (k + 1) as f64 * x / l + p).cos())
                    .sum();
                s * envelope
            }
            SourceFamily::Bump => {
                let d = periodic_offset(x - self.center, l) / self.width;
                let s = (t - self.t_center) / self.t_width;
                (-d * d - s * s).exp()
            }
            SourceFamily::NearSingular => {
                let d = periodic_offset(x - self.center, l).abs();
                (d + cfg.singular_offset).powf(-self.exponent) * envelope
            }
        }
    }

    fn sample(&self, cfg: &EstimateConfig, n: usize, frames: usize) -> Result<Trajectory> {
        let dt = cfg.duration / (frames - 1) as f64;
        Trajectory::from_fn(n, cfg.period, 0.0, dt, frames, |x, t| self.eval(x, t, cfg))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleRow {
    pub n: usize,
    pub frames: usize,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub argmax_family: SourceFamily,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateTable {
    pub quadruple: Quadruple,
    pub regime: EstimateRegime,
    pub rows: Vec<ScaleRow>,
    /// `max_ratio[i+1] / max_ratio[i] - 1`.
    pub growth: Vec<f64>,
    /// Whether every growth is below [`STABILITY_GROWTH`]; `None` for probes.
    pub stable: Option<bool>,
}

impl EstimateTable {
    pub fn max_growth(&self) -> f64 {
        self.growth.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest ratio on the finest grid.
    pub fn constant(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.max_ratio)
    }
}

/// Ratios for every quadruple at one resolution; shares Duhamel solves across
/// quadruples with the same `k`.
fn ratios_at_scale(
    quads: &[Quadruple],
    sources: &[Source],
    cfg: &EstimateConfig,
    n: usize,
    frames: usize,
) -> Result<Vec<Vec<f64>>> {
    let per_trial: Vec<Vec<f64>> = sources
        .par_iter()
        .map(|src| -> Result<Vec<f64>> {
            let f = src.sample(cfg, n, frames)?;
            let mut solved: Vec<(u32, Trajectory)> = Vec::new();
            quads
                .iter()
                .map(|q| {
                    if !solved.iter().any(|(k, _)| *k == q.k) {
                        solved.push((q.k, duhamel(&f, q.k)?));
                    }
                    let v = &solved.iter().find(|(k, _)| *k == q.k).expect("solved above").1;
                    let num = mixed_norm(v, &q.target(), &Region::Whole)?;
                    let den = mixed_norm(&f, &q.source(), &Region::Whole)?;
                    Ok(num / den)
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..quads.len())
        .map(|qi| per_trial.iter().map(|r| r[qi]).collect())
        .collect())
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let m = s.len();
    if m % 2 == 1 {
        s[m / 2]
    } else {
        0.5 * (s[m / 2 - 1] + s[m / 2])
    }
}

/// Runs the estimate study for several quadruples on shared random sources.
pub fn verify_convolution_estimates(quads: &[Quadruple], cfg: &EstimateConfig) -> Result<Vec<EstimateTable>> {
    cfg.validate()?;
    let sources: Vec<Source> = (0..cfg.trials).map(|i| Source::draw(cfg, i)).collect();
    let mut rows: Vec<Vec<ScaleRow>> = vec![Vec::new(); quads.len()];
    for (n, frames) in cfg.scales() {
        let ratios = ratios_at_scale(quads, &sources, cfg, n, frames)?;
        for (qi, r) in ratios.iter().enumerate() {
            let (arg, max) = r
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |a, (i, &x)| if x > a.1 { (i, x) } else { a });
            rows[qi].push(ScaleRow {
                n,
                frames,
                max_ratio: max,
                median_ratio: median(r),
                argmax_family: sources[arg].family,
            });
        }
    }
    Ok(quads
        .iter()
        .zip(rows)
        .map(|(q, rows)| {
            let growth: Vec<f64> = rows.windows(2).map(|w| w[1].max_ratio / w[0].max_ratio - 1.0).collect();
            let regime = q.regime();
            let stable = (regime != EstimateRegime::UnboundedProbe)
                .then(|| growth.iter().all(|g| *g < STABILITY_GROWTH));
            EstimateTable {
                quadruple: *q,
                regime,
                rows,
                growth,
                stable,
            }
        })
        .collect())
}

pub fn verify_convolution_estimate(quad: &Quadruple, cfg: &EstimateConfig) -> Result<EstimateTable> {
    Ok(verify_convolution_estimates(std::slice::from_ref(quad), cfg)?
        .pop()
        .expect("one table per quadruple"))
}

/// Measured constant for `(3; q, q', ∞, ∞)` and the smallness threshold `1/(2C)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Calibration {
    pub exponents: MixedExponents,
    pub constant: f64,
    pub threshold: f64,
}

pub fn calibrate_smallness(exps: &MixedExponents, cfg: &EstimateConfig) -> Result<Calibration> {
    let q = Quadruple::new(3, exps.space, exps.time, Exponent::Infinite, Exponent::Infinite)?;
    let table = verify_convolution_estimate(&q, cfg)?;
    let constant = table.rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    Ok(Calibration {
        exponents: *exps,
        constant,
        threshold: 1.0 / (2.0 * constant),
    })
}

/// Strict and borderline quadruples used by the stability study, then the probe.
pub fn standard_quadruples() -> Vec<Quadruple> {
    [
        "3; 5/3, 5/3, 5/3, 5/3",
        "0; 2, 2, 4, 4",
        "3; 4, 8, inf, inf",
        "1; 2, 2, inf, inf",
        "2; 2, 4, 4, 8",
        "3; 2, 2, 2, 4",
        "2; 1, 2, 2, 8",
        "3; 1, 2, inf, 2",
    ]
    .iter()
    .map(|s| Quadruple::parse(s).expect("valid literal"))
    .collect()
}
