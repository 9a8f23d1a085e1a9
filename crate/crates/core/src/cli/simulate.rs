use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::config::ExperimentConfig;
use super::output::{num, Output};
use super::Outcome;
use crate::checkpoint::save_checkpoint;
use crate::error::{Error, Result};
use crate::field::GridField;
use crate::solver::{energy_record, energy_report, simulate, Scheme, SolverConfig};

pub const DEFAULTS: &[(&str, &str)] = &[
    ("n", "64"),
    ("period", "6.283185307179586"),
    ("dt", "0.001"),
    ("t_final", "1"),
    ("save_every", "10"),
    ("scheme", "exp-rk4"),
    ("dealias", "true"),
    ("nonlinear", "true"),
    ("init", "modes"),
    ("amplitude", "0.5"),
    ("modes", "3"),
    ("seed", "1"),
];

/// Initial data named by the `init` key; always of zero mean.
pub fn initial_data(cfg: &ExperimentConfig, n: usize, period: f64) -> Result<GridField> {
    let amplitude: f64 = cfg.get("amplitude")?;
    let omega = 2.0 * PI / period;
    match cfg.raw("init")? {
        "zero" => GridField::zeros(n, period),
        "sine" => GridField::from_fn(n, period, |x| amplitude * (omega * x).sin()),
        "modes" => {
            let modes: usize = cfg.get("modes")?;
            if modes >= n / 2 {
                return Err(Error::Config(format!("key 'modes': {modes} modes do not fit on {n} points")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.get("seed")?);
            let coeffs: Vec<(f64, f64)> = (0..modes)
                .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            GridField::from_fn(n, period, |x| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, (a, b))| {
                        let k = (i + 1) as f64;
                        amplitude * (a * (k * omega * x).cos() + b * (k * omega * x).sin()) / (k * k)
                    })
                    .sum()
            })
        }
        other => Err(Error::Config(format!("key 'init': unknown initial data {other:?}"))),
    }
}

pub fn solver_config(cfg: &ExperimentConfig) -> Result<SolverConfig> {
    let mut sc = SolverConfig::new(cfg.get("n")?, cfg.get("period")?, cfg.get("dt")?, cfg.get("t_final")?)
        .with_save_every(cfg.get("save_every")?)
        .with_dealias(cfg.get("dealias")?)
        .with_scheme(cfg.raw("scheme")?.parse::<Scheme>()?);
    if !cfg.get::<bool>("nonlinear")? {
        sc = sc.linear_only();
    }
    sc.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(sc)
}

pub fn run(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome> {
    let sc = solver_config(cfg)?;
    let u0 = initial_data(cfg, sc.n, sc.period)?;
    let sim = simulate(&u0, &sc)?;
    let traj = &sim.trajectory;

    let mut meta = BTreeMap::new();
    meta.insert("config_hash".to_string(), cfg.hash());
    for (k, v) in cfg.values() {
        meta.insert(format!("cfg.{k}"), v.clone());
    }
    save_checkpoint(&out.path("trajectory.csv"), traj, &meta)?;

    let (records, residuals, max_dissipation, max_residual) = if traj.len() >= 3 {
        let rep = energy_report(traj)?;
        let res: BTreeMap<usize, f64> = rep
            .residuals
            .iter()
            .map(|&(t, r)| (((t - traj.start()) / traj.dt()).round() as usize, r))
            .collect();
        (rep.records, res, rep.max_dissipation, Some(rep.max_residual))
    } else {
        let recs: Vec<_> = traj.frames().iter().zip(traj.times()).map(|(f, &t)| energy_record(f, t)).collect();
        let md = recs.iter().fold(0.0_f64, |a, r| a.max(r.dissipation));
        (recs, BTreeMap::new(), md, None)
    };
    let rows: Vec<Vec<String>> = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                num(r.t),
                num(r.energy),
                num(r.dissipation),
                num(r.transfer),
                residuals.get(&i).map_or(String::new(), |&v| num(v)),
            ]
        })
        .collect();
    out.csv("energy.csv", &["t", "energy", "dissipation", "transfer", "residual"], &rows)?;

    let mean_drift = traj.frames().iter().fold(0.0_f64, |a, f| a.max((f.mean() - u0.mean()).abs()));
    out.json(
        "simulate_summary.json",
        json!({
            "frames": traj.len(),
            "final_time": traj.end(),
            "final_max_abs": traj.last().max_abs(),
            "stability_number": sim.stability,
            "diverged": sim.diverged(),
            "divergence": sim.divergence,
            "max_dissipation": max_dissipation,
            "max_energy_residual": max_residual,
            "mean_drift": mean_drift,
        }),
    )?;
    Ok(if sim.diverged() { Outcome::Diverged } else { Outcome::Completed })
}
