use serde_json::json;

use super::config::ExperimentConfig;
use super::output::{num, Output};
use super::Outcome;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::kernel::{decay_exponent, log_log_slope, KernelEval};

pub const DEFAULTS: &[(&str, &str)] = &[
    ("r_max", "10"),
    ("r_step", "0.05"),
    ("orders", "0,1,2,3"),
    ("exponents", "1,2,inf"),
    ("t_min", "0.01"),
    ("t_max", "100"),
    ("points_per_decade", "2"),
];

fn fit_times(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let t_min: f64 = cfg.get("t_min")?;
    let t_max: f64 = cfg.get("t_max")?;
    let per: usize = cfg.get("points_per_decade")?;
    if !(t_min > 0.0 && t_max > t_min) || per == 0 {
        return Err(Error::Config("need 0 < t_min < t_max and points_per_decade >= 1".into()));
    }
    let decades = (t_max / t_min).log10();
    let count = (decades * per as f64).round() as usize;
    Ok((0..=count)
        .map(|i| t_min * 10f64.powf(i as f64 / per as f64))
        .collect())
}

pub fn run(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome> {
    let r_max: f64 = cfg.get("r_max")?;
    let r_step: f64 = cfg.get("r_step")?;
    if !(r_step > 0.0 && r_max >= 0.0) {
        return Err(Error::Config("need r_step > 0 and r_max >= 0".into()));
    }
    let orders: Vec<usize> = cfg.list("orders")?;
    if let Some(k) = orders.iter().find(|&&k| k > 3) {
        return Err(Error::Config(format!("key 'orders': order {k} > 3")));
    }
    let exps: Vec<Exponent> = cfg.list("exponents")?;
    let times = fit_times(cfg)?;
    let eval = KernelEval::shared();

    let count = (r_max / r_step).round() as usize;
    let profile = (0..=count)
        .map(|i| {
            let r = i as f64 * r_step;
            let k = eval.profile_all(r)?;
            Ok(vec![num(r), num(k[0]), num(k[1]), num(k[2]), num(k[3])])
        })
        .collect::<Result<Vec<_>>>()?;
    out.csv("kernel_profile.csv", &["r", "K", "K1", "K2", "K3"], &profile)?;

    let mut norm_rows = Vec::new();
    let mut fit_rows = Vec::new();
    let mut fits = Vec::new();
    let mut max_dev = 0.0_f64;
    for &k in &orders {
        for &p in &exps {
            let pts = times
                .iter()
                .map(|&t| Ok((t, eval.kernel_lp_norm(t, p, k)?)))
                .collect::<Result<Vec<_>>>()?;
            for &(t, n) in &pts {
                norm_rows.push(vec![num(t), p.to_string(), k.to_string(), num(n)]);
            }
            let slope = log_log_slope(&pts);
            let target = decay_exponent(p, k);
            let dev = (slope - target).abs();
            max_dev = max_dev.max(dev);
            fit_rows.push(vec![k.to_string(), p.to_string(), num(slope), num(target), num(dev)]);
            fits.push(json!({"k": k, "p": p, "slope": slope, "target": target, "deviation": dev}));
        }
    }
    out.csv("decay_norms.csv", &["t", "p", "k", "norm"], &norm_rows)?;
    out.csv("decay_fit.csv", &["k", "p", "slope", "target", "deviation"], &fit_rows)?;

    let norm = eval.normalization();
    out.json(
        "kernel_summary.json",
        json!({
            "normalization": norm.c,
            "l1_norm": norm.l1_norm,
            "k_at_zero": eval.profile(0.0, 0)?,
            "fits": fits,
            "max_deviation": max_dev,
        }),
    )?;
    Ok(Outcome::Completed)
}
