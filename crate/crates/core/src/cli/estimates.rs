use serde_json::json;

use super::config::ExperimentConfig;
use super::output::{num, Output};
use super::Outcome;
use crate::error::{Error, Result};
use crate::mild::{standard_quadruples, verify_convolution_estimates, EstimateConfig, Quadruple};

pub const DEFAULTS: &[(&str, &str)] = &[
    ("quadruples", "standard"),
    ("period", "1"),
    ("duration", "0.02"),
    ("base_n", "64"),
    ("base_frames", "32"),
    ("levels", "3"),
    ("trials", "12"),
    ("seed", "7"),
    ("singular_offset", "0.01"),
];

/// Estimate ladder from the config; `seed_key` names the key holding the seed.
pub fn estimate_config(cfg: &ExperimentConfig, seed_key: &str) -> Result<EstimateConfig> {
    Ok(EstimateConfig {
        period: cfg.get("period")?,
        duration: cfg.get("duration")?,
        base_n: cfg.get("base_n")?,
        base_frames: cfg.get("base_frames")?,
        levels: cfg.get("levels")?,
        trials: cfg.get("trials")?,
        seed: cfg.get(seed_key)?,
        singular_offset: cfg.get("singular_offset")?,
    })
}

/// `standard`, or quadruples `k; l, l', r, r'` separated by `|`.
fn quadruples(cfg: &ExperimentConfig) -> Result<Vec<Quadruple>> {
    match cfg.raw("quadruples")? {
        "standard" => Ok(standard_quadruples()),
        list => list
            .split('|')
            .map(|s| Quadruple::parse(s).map_err(|e| Error::Config(format!("key 'quadruples': {e}"))))
            .collect(),
    }
}

pub fn run(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome> {
    let ecfg = estimate_config(cfg, "seed")?;
    let quads = quadruples(cfg)?;
    let tables = verify_convolution_estimates(&quads, &ecfg)?;
    let mut rows = Vec::new();
    for t in &tables {
        let q = &t.quadruple;
        for (i, r) in t.rows.iter().enumerate() {
            let growth = if i == 0 { String::new() } else { num(t.growth[i - 1]) };
            rows.push(vec![
                q.k.to_string(),
                q.l.to_string(),
                q.l_time.to_string(),
                q.r.to_string(),
                q.r_time.to_string(),
                t.regime.to_string(),
                r.n.to_string(),
                r.frames.to_string(),
                num(r.max_ratio),
                num(r.median_ratio),
                serde_json::to_value(r.argmax_family)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default(),
                growth,
            ]);
        }
    }
    out.csv(
        "estimates.csv",
        &["k", "l", "l_time", "r", "r_time", "regime", "n", "frames", "max_ratio", "median_ratio", "argmax_family", "growth"],
        &rows,
    )?;
    let summary: Vec<_> = tables
        .iter()
        .map(|t| json!({"table": t, "constant": t.constant(), "max_growth": t.max_growth()}))
        .collect();
    out.json("estimates.json", json!({"ladder": ecfg, "tables": summary}))?;
    Ok(Outcome::Completed)
}
