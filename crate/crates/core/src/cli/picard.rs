use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::config::ExperimentConfig;
use super::estimates::estimate_config;
use super::output::Output;
use super::Outcome;
use crate::error::{Error, Result};
use crate::exponent::MixedExponents;
use crate::field::{GridField, ParabolicCylinder, Region, Trajectory};
use crate::mild::{
    calibrate_smallness, fixed_point_residual, mollify, picard_solve, picard_solve_from, representation_residual,
    CutoffFunction,
};
use crate::norm::mixed_norm;

pub const DEFAULTS: &[(&str, &str)] = &[
    ("n", "128"),
    ("frames", "65"),
    ("period", "1"),
    ("duration", "0.02"),
    ("q", "4"),
    ("q_time", "8"),
    ("factor", "0.5"),
    ("modes", "4"),
    ("seed", "11"),
    ("mollify_eps", "0.05"),
    ("theta", "0.7"),
    ("tol", "1e-10"),
    ("max_iter", "80"),
    ("base_n", "64"),
    ("base_frames", "32"),
    ("levels", "3"),
    ("trials", "12"),
    ("calibration_seed", "7"),
    ("singular_offset", "0.01"),
];

/// Random trigonometric field with amplitudes varying linearly in time.
fn random_field(cfg: &ExperimentConfig, n: usize, frames: usize, period: f64, duration: f64) -> Result<Trajectory> {
    let modes: usize = cfg.get("modes")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.get("seed")?);
    let coeffs: Vec<[f64; 4]> = (0..modes)
        .map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
        .collect();
    if frames < 2 {
        return Err(Error::Config("key 'frames': need at least 2".into()));
    }
    let omega = 2.0 * PI / period;
    let dt = duration / (frames - 1) as f64;
    Trajectory::from_fn(n, period, 0.0, dt, frames, |x, t| {
        let s = t / duration;
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = (i + 1) as f64;
                ((c[0] + s * c[1]) * (k * omega * x).cos() + (c[2] + s * c[3]) * (k * omega * x).sin()) / k
            })
            .sum()
    })
}

pub fn run(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome> {
    let n: usize = cfg.get("n")?;
    let frames: usize = cfg.get("frames")?;
    let period: f64 = cfg.get("period")?;
    let duration: f64 = cfg.get("duration")?;
    let exps = MixedExponents::new(cfg.get("q")?, cfg.get("q_time")?);
    let factor: f64 = cfg.get("factor")?;
    let eps: f64 = cfg.get("mollify_eps")?;
    let tol: f64 = cfg.get("tol")?;
    let max_iter: usize = cfg.get("max_iter")?;
    if !(factor >= 0.0) {
        return Err(Error::Config("key 'factor': must be non-negative".into()));
    }

    let mut ecfg = estimate_config(cfg, "calibration_seed")?;
    ecfg.period = period;
    ecfg.duration = duration;
    let calibration = calibrate_smallness(&exps, &ecfg)?;

    let raw = random_field(cfg, n, frames, period, duration)?;
    let smooth = if eps > 0.0 { mollify(&raw, eps)? } else { raw };
    let norm = mixed_norm(&smooth, &exps, &Region::Whole)?;
    let v = if norm > 0.0 {
        smooth.scale(factor * calibration.threshold / norm)
    } else {
        smooth
    };

    let radius = duration.powf(0.25);
    let cylinder = ParabolicCylinder::new(0.5 * period, duration, radius)?;
    let cutoff = CutoffFunction::for_cylinder(&cylinder, period, cfg.get("theta")?)?;
    let (w, report) = picard_solve(&v, &cutoff, &exps, tol, max_iter)?;
    if report.differences.iter().any(|d| !d.is_finite()) {
        return Err(Error::Divergence { time: duration });
    }
    let fixed = fixed_point_residual(&v, &w, &cutoff)?;
    let representation = representation_residual(&w, &v, &cutoff)?;

    let start = w.map_frames(|f| Ok(f.scale(2.0)))?;
    let start = if start.max_abs() > 0.0 {
        start
    } else {
        w.map_frames(|f| GridField::from_fn(f.len(), period, |x| (2.0 * PI * x / period).sin()))?
    };
    let (w_alt, report_alt) = picard_solve_from(&v, &cutoff, &exps, tol, max_iter, &start)?;

    out.json(
        "picard.json",
        json!({
            "calibration": calibration,
            "cylinder": {"center": cylinder.center, "top": cylinder.top, "radius": cylinder.radius},
            "report": report,
            "max_ratio": report.max_ratio(),
            "fixed_point_residual": fixed,
            "representation_residual": representation,
            "alternate_start": {
                "converged": report_alt.converged,
                "iterates": report_alt.iterates,
                "difference": w.max_abs_diff(&w_alt),
            },
        }),
    )?;
    Ok(Outcome::Completed)
}
