use std::path::Path;

use serde_json::json;

use super::config::ExperimentConfig;
use super::output::{num, Output};
use super::Outcome;
use crate::checkpoint::load_checkpoint;
use crate::diagnostics::{
    census_from_gradient, gradient, local_y_from_gradient, poincare_residual_with_gradient, serrin_monitor,
    serrin_y_bound, CensusEntry, PoincareVariant,
};
use crate::error::{Error, Result};
use crate::exponent::{Exponent, MixedExponents};
use crate::field::{ParabolicCylinder, Region, Trajectory};
use crate::kernel::log_log_slope;
use crate::spectral::interpolate;

pub const DEFAULTS: &[(&str, &str)] = &[
    ("checkpoint", ""),
    ("radii", "0.9,0.75,0.6"),
    ("eps0", "0.1"),
    ("stride", "1"),
    ("exponents", "inf:5,inf:4,4:8,3:inf"),
    ("oracle_refine", "4"),
];

/// `space:time` pairs separated by commas.
fn exponent_pairs(cfg: &ExperimentConfig) -> Result<Vec<MixedExponents>> {
    cfg.raw("exponents")?
        .split(',')
        .map(|item| {
            let (q, qt) = item
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("key 'exponents': {item:?} is not space:time")))?;
            let q: Exponent = q.parse().map_err(|e| Error::Config(format!("key 'exponents': {e}")))?;
            let qt: Exponent = qt.parse().map_err(|e| Error::Config(format!("key 'exponents': {e}")))?;
            Ok(MixedExponents::new(q, qt))
        })
        .collect()
}

fn refined_gradient(traj: &Trajectory, factor: usize) -> Result<Trajectory> {
    gradient(&traj.map_frames(|f| interpolate(f, factor))?)
}

pub fn run(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome> {
    let path = cfg.raw("checkpoint")?;
    if path.is_empty() {
        return Err(Error::Config("key 'checkpoint': no trajectory given".into()));
    }
    let traj = load_checkpoint(Path::new(path))?.trajectory;
    let radii: Vec<f64> = cfg.list("radii")?;
    let eps0: f64 = cfg.get("eps0")?;
    let stride: usize = cfg.get("stride")?;
    let refine: usize = cfg.get("oracle_refine")?;
    let pairs = exponent_pairs(cfg)?;
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::Config("key 'radii': need positive radii".into()));
    }

    let grad = gradient(&traj)?;
    let censuses = radii
        .iter()
        .map(|&r| census_from_gradient(&grad, r, eps0, stride))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<String>> = censuses
        .iter()
        .flat_map(|c| c.entries.iter())
        .map(|e| vec![num(e.center), num(e.top), num(e.radius), num(e.y), u8::from(!e.good).to_string()])
        .collect();
    out.csv("census.csv", &["x0", "t0", "r", "Y", "flag"], &rows)?;

    let pts: Vec<(f64, f64)> = censuses
        .iter()
        .filter(|c| c.bad > 0)
        .map(|c| (1.0 / c.radius, c.bad as f64))
        .collect();
    let slope = (pts.len() >= 2).then(|| log_log_slope(&pts));
    let counts: Vec<_> = censuses
        .iter()
        .map(|c| json!({"radius": c.radius, "cylinders": c.entries.len(), "good": c.good, "bad": c.bad}))
        .collect();

    let serrin = pairs
        .iter()
        .map(|e| serrin_monitor(&traj, e, &Region::Whole).map(|r| json!({"exponents": e, "report": r})))
        .collect::<Result<Vec<_>>>()?;

    let first = &censuses[0];
    let cylinders: Vec<ParabolicCylinder> = first
        .entries
        .iter()
        .map(|e| ParabolicCylinder::new(e.center, e.top, e.radius))
        .collect::<Result<_>>()?;
    let mut poincare_max = 0.0_f64;
    for q in &cylinders {
        let rep = poincare_residual_with_gradient(&traj, &grad, q, PoincareVariant::Cubic)?;
        if rep.ratio.is_finite() {
            poincare_max = poincare_max.max(rep.ratio);
        }
    }

    let holder = pairs
        .iter()
        .filter(|e| e.space.value() >= 3.0 && e.time.value() >= 3.0)
        .map(|e| {
            let mut worst = 0.0_f64;
            for q in &cylinders {
                let h = serrin_y_bound(&grad, q, e)?;
                if h.bound > 0.0 {
                    worst = worst.max(h.y / h.bound);
                } else if h.y > 0.0 {
                    worst = f64::INFINITY;
                }
            }
            Ok(json!({"exponents": e, "max_y_over_bound": worst}))
        })
        .collect::<Result<Vec<_>>>()?;

    let oracle = match first.entries.iter().copied().reduce(|a: CensusEntry, b| if b.y > a.y { b } else { a }) {
        Some(e) if refine > 1 => {
            let q = ParabolicCylinder::new(e.center, e.top, e.radius)?;
            let fine = local_y_from_gradient(&refined_gradient(&traj, refine)?, &q)?;
            let scale = fine.abs().max(e.y.abs()).max(f64::MIN_POSITIVE);
            json!({"x0": e.center, "t0": e.top, "r": e.radius, "y_grid": e.y, "y_fine": fine,
                   "refine": refine, "relative_difference": (fine - e.y).abs() / scale})
        }
        _ => json!(null),
    };

    out.json(
        "diagnose_summary.json",
        json!({
            "eps0": eps0,
            "counts": counts,
            "bad_count_slope": slope,
            "serrin": serrin,
            "poincare_max_ratio": poincare_max,
            "holder": holder,
            "oracle_check": oracle,
        }),
    )?;
    Ok(Outcome::Completed)
}
