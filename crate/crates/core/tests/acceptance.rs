//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::panic;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

use sgm::diagnostics::{gradient, local_y, local_y_from_gradient, poincare_residual, serrin_y_bound, PoincareVariant};
use sgm::kernel::{decay_exponent, decay_slope};
use sgm::mild::{
    calibrate_smallness, duhamel, fixed_point_residual, picard_solve, picard_solve_from, standard_quadruples,
    verify_convolution_estimates, CutoffFunction, EstimateConfig, EstimateRegime,
};
use sgm::solver::{energy_report, simulate, weak_form_residual, SolverConfig};
use sgm::spectral::{convolve, derivative, fractional, slobodeckij_norm, sobolev_norm};
use sgm::{
    mixed_norm, Criticality, Exponent, GridField, KernelEval, MixedExponents, ParabolicCylinder, Region, Trajectory,
    Window,
};

/// Collects the individual checks of one criterion.
#[derive(Default)]
struct Report {
    ok: bool,
    lines: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Self { ok: true, lines: Vec::new() }
    }

    fn check(&mut self, cond: bool, msg: String) {
        self.ok &= cond;
        self.lines.push(format!("{} {msg}", if cond { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, msg: String) {
        self.lines.push(format!("info {msg}"));
    }
}

fn kernel_decay_laws() -> Report {
    let mut rep = Report::new();
    let eval = KernelEval::shared();
    let start = Instant::now();
    for k in 0..4 {
        for p in [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinite] {
            let slope = decay_slope(eval, p, k).expect("decay slope");
            let target = decay_exponent(p, k);
            rep.check((slope - target).abs() <= 0.02, format!("k={k} p={p}: slope {slope:.6} target {target:.6}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    rep.check(secs < 30.0, format!("runtime {secs:.2} s"));
    rep
}

fn kernel_identities() -> Report {
    let mut rep = Report::new();
    let eval = KernelEval::shared();
    let mut worst_mass = 0.0_f64;
    for i in 0..=8 {
        let t = 10f64.powf(-2.0 + 0.5 * i as f64);
        worst_mass = worst_mass.max((eval.mass(t).unwrap() - 1.0).abs());
    }
    rep.check(worst_mass <= 1e-10, format!("mass over t in [1e-2, 1e2]: max |m - 1| = {worst_mass:.2e}"));

    let mut worst_scale = 0.0_f64;
    for &lambda in &[0.5, 2.0, 3.0] {
        for &t in &[0.01, 0.3, 2.0] {
            for &x in &[0.0, 0.05, 0.4, 1.3] {
                let lhs = eval.eval_kernel(lambda * x, lambda.powi(4) * t, 0).unwrap();
                let rhs = eval.eval_kernel(x, t, 0).unwrap() / lambda;
                worst_scale = worst_scale.max((lhs - rhs).abs());
            }
        }
    }
    rep.check(worst_scale <= 1e-10, format!("scaling: max deviation {worst_scale:.2e}"));

    let (n, l) = (256, 1.0);
    let a = eval.periodized_kernel(0.004, n, l, 0).unwrap();
    let b = eval.periodized_kernel(0.006, n, l, 0).unwrap();
    let ab = eval.periodized_kernel(0.01, n, l, 0).unwrap();
    let semi = convolve(&a, &b).unwrap().max_abs_diff(&ab);
    rep.check(semi <= 1e-12, format!("semigroup on the torus: {semi:.2e}"));

    let k0 = eval.profile(0.0, 0).unwrap();
    let dev = (k0 - gamma(1.25)).abs();
    rep.check(dev <= 1e-10, format!("K(0) = {k0:.15} vs Gamma(5/4): {dev:.2e}"));
    rep
}

fn band_limited(rng: &mut ChaCha8Rng, n: usize, l: f64, modes: usize) -> GridField {
    let c: Vec<(f64, f64)> = (0..modes).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    GridField::from_fn(n, l, |x| {
        c.iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let w = 2.0 * PI * (i + 1) as f64 * x / l;
                a * w.cos() + b * w.sin()
            })
            .sum()
    })
    .unwrap()
}

fn spectral_identities() -> Report {
    let mut rep = Report::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_grad, mut worst_half) = (0.0_f64, 0.0_f64);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for _ in 0..100 {
        let l = rng.gen_range(0.5..4.0);
        let modes = rng.gen_range(1..=12);
        let f = band_limited(&mut rng, 64, l, modes);
        let lam = fractional(&f, 1.0).unwrap();
        let fx = derivative(&f, 1);
        worst_grad = worst_grad.max((2.0 * PI * lam.l2_norm() - fx.l2_norm()).abs() / fx.l2_norm());
        let half = fractional(&fractional(&f, 0.5).unwrap(), 0.5).unwrap();
        worst_half = worst_half.max(half.max_abs_diff(&lam) / lam.max_abs());
        let slob = slobodeckij_norm(&f, 0.5, Window::Torus).unwrap().total();
        let ratio = slob / sobolev_norm(&f, 0.5);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    rep.check(worst_grad <= 1e-12, format!("2 pi |Lambda f| = |f_x|: max rel {worst_grad:.2e}"));
    rep.check(worst_half <= 1e-12, format!("Lambda^(1/2) Lambda^(1/2) = Lambda: max rel {worst_half:.2e}"));
    rep.check(lo >= 0.1 && hi <= 10.0, format!("Slobodeckij / Fourier ratio in [{lo:.3}, {hi:.3}]"));
    rep
}

fn final_state(u0: &GridField, cfg: &SolverConfig) -> GridField {
    simulate(u0, cfg).unwrap().trajectory.last().clone()
}

fn solver_correctness() -> Report {
    let mut rep = Report::new();
    let l = 2.0 * PI;

    let (n, kappa, t) = (32, 2.0, 0.2);
    let u0 = GridField::from_fn(n, l, |x| (kappa * x).sin()).unwrap();
    let cfg = SolverConfig::new(n, l, 0.01, t).linear_only();
    let got = final_state(&u0, &cfg);
    let exact = u0.scale((-kappa.powi(4) * t).exp());
    let rel = got.max_abs_diff(&exact) / exact.max_abs();
    rep.check(rel <= 1e-9, format!("linear single-mode decay: rel error {rel:.2e}"));

    let u0 = GridField::from_fn(32, l, |x| 0.8 * x.sin() + 0.5 * (2.0 * x).cos() - 0.3 * (3.0 * x).sin()).unwrap();
    let t_final = 0.5;
    let run = |steps: usize| {
        let cfg = SolverConfig::new(32, l, t_final / steps as f64, t_final).with_save_every(steps);
        final_state(&u0, &cfg)
    };
    let reference = run(8192);
    let errs: Vec<f64> = [128, 256, 512, 1024].iter().map(|&m| run(m).max_abs_diff(&reference)).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        rep.check(ratio >= 8.0, format!("time convergence: error {:.2e} -> {:.2e}, ratio {ratio:.1}", w[0], w[1]));
    }

    let u0 = GridField::from_fn(64, l, |x| 0.3 * x.sin() + 0.2 * (2.0 * x).cos()).unwrap();
    let burn = SolverConfig::new(64, l, 2.5e-4, 0.1).with_save_every(400);
    let u1 = final_state(&u0, &burn);
    let cfg = SolverConfig::new(64, l, 2.5e-4, 0.5).with_save_every(4);
    let traj = simulate(&u1, &cfg).unwrap().trajectory;
    let energy = energy_report(&traj).unwrap();
    rep.check(
        energy.max_residual < 1e-6 * energy.max_dissipation,
        format!("energy identity: residual {:.2e}, max D {:.3}", energy.max_residual, energy.max_dissipation),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u0 = band_limited(&mut rng, 64, l, 8).scale(0.2);
    let u0 = u0.map(|v| v - u0.mean());
    let traj = simulate(&u0, &SolverConfig::new(64, l, 1e-3, 1.0).with_save_every(10)).unwrap().trajectory;
    let drift = traj.frames().iter().map(|f| (f.mean() - u0.mean()).abs()).fold(0.0, f64::max);
    rep.check(drift <= 1e-12, format!("mean conservation: drift {drift:.2e}"));

    let phi = CutoffFunction::bump(3.0, 2.5, 0.1, 0.9, l).unwrap();
    let u0 = GridField::from_fn(256, l, |x| 0.3 * x.sin() + 0.2 * (2.0 * x).cos()).unwrap();
    let residuals: Vec<f64> = [20, 40, 80]
        .iter()
        .map(|&m| {
            let cfg = SolverConfig::new(256, l, 1.0 / (4 * m) as f64, 1.0).with_save_every(4);
            weak_form_residual(&simulate(&u0, &cfg).unwrap().trajectory, &phi).unwrap()
        })
        .collect();
    for w in residuals.windows(2) {
        let ratio = w[0] / w[1];
        rep.check(ratio >= 4.0, format!("weak form: residual {:.2e} -> {:.2e}, ratio {ratio:.1}", w[0], w[1]));
    }
    rep
}

fn mild_solutions() -> Report {
    let mut rep = Report::new();
    let (a, b) = (1.3, -40.0);
    let theta = 2.0 * PI;
    let lambda = theta.powi(4);
    let source = Trajectory::from_fn(32, 1.0, 0.0, 0.05 / 40.0, 41, |x, t| (a + b * t) * (theta * x).cos()).unwrap();
    let amplitude = |t: f64| {
        let e = 1.0 - (-lambda * t).exp();
        a * e / lambda + b * (t / lambda - e / (lambda * lambda))
    };
    for k in 0..=3u32 {
        let d = duhamel(&source, k).unwrap();
        let exact = Trajectory::from_fn(32, 1.0, 0.0, 0.05 / 40.0, 41, |x, t| {
            amplitude(t) * theta.powi(k as i32) * (theta * x + k as f64 * PI / 2.0).cos()
        })
        .unwrap();
        let rel = d.max_abs_diff(&exact) / exact.max_abs();
        rep.check(rel <= 1e-8, format!("Duhamel order {k} vs exact single-mode solution: rel {rel:.2e}"));
    }

    let exps = MixedExponents::finite(4.0, 8.0).unwrap();
    let cal = calibrate_smallness(&exps, &EstimateConfig::default()).unwrap();
    rep.note(format!("calibrated constant {:.5}, threshold {:.5}", cal.constant, cal.threshold));
    let t_end: f64 = 0.02;
    let q = ParabolicCylinder::new(0.5, t_end, t_end.powf(0.25)).unwrap();
    let cutoff = CutoffFunction::for_cylinder(&q, 1.0, 0.7).unwrap();
    let base = Trajectory::from_fn(128, 1.0, 0.0, t_end / 64.0, 65, |x, t| {
        ((2.0 * PI * x).cos() + 0.5 * (4.0 * PI * x + 1.0).sin()) * (1.0 + 20.0 * t)
    })
    .unwrap();
    let v = base.scale(0.5 * cal.threshold / mixed_norm(&base, &exps, &Region::Whole).unwrap());
    let tol = 1e-10;
    let (w, report) = picard_solve(&v, &cutoff, &exps, tol, 80).unwrap();
    let max_ratio = report.max_ratio().unwrap_or(0.0);
    rep.check(
        report.converged && max_ratio <= 0.55,
        format!("Picard at half threshold: {} iterates, max ratio {max_ratio:.3}", report.iterates),
    );
    let fp = fixed_point_residual(&v, &w, &cutoff).unwrap();
    rep.check(fp < 10.0 * tol, format!("fixed-point plug-back residual {fp:.2e}"));
    let (w2, _) = picard_solve_from(&v, &cutoff, &exps, tol, 80, &w.scale(-3.0)).unwrap();
    let diff = w.max_abs_diff(&w2);
    rep.check(diff < 10.0 * tol, format!("limit independent of the start: {diff:.2e}"));
    rep
}

fn estimate_stability() -> Report {
    let mut rep = Report::new();
    let start = Instant::now();
    let tables = verify_convolution_estimates(&standard_quadruples(), &EstimateConfig::default()).unwrap();
    let count = |r: EstimateRegime| tables.iter().filter(|t| t.regime == r).count();
    rep.check(
        count(EstimateRegime::Strict) == 5 && count(EstimateRegime::Borderline) == 2,
        "five strict and two borderline quadruples".to_string(),
    );
    for t in &tables {
        let q = t.quadruple;
        let label = format!("({}; {}, {}, {}, {}) {}", q.k, q.l, q.l_time, q.r, q.r_time, t.regime);
        let ratios: Vec<String> = t.rows.iter().map(|r| format!("{:.4}", r.max_ratio)).collect();
        let msg = format!("{label}: ratios [{}], max growth {:.2}%", ratios.join(", "), 100.0 * t.max_growth());
        if t.regime == EstimateRegime::UnboundedProbe {
            rep.note(msg);
        } else {
            rep.check(t.rows.len() == 3 && t.stable == Some(true), msg);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    rep.check(secs < 300.0, format!("runtime {secs:.1} s"));
    rep
}

fn smooth_solution(n: usize, frames: usize, dt: f64) -> Trajectory {
    Trajectory::from_fn(n, 1.0, 0.0, dt, frames, |x, t| {
        (2.0 * PI * x + 3.0 * t).sin() * (-2.0 * t).exp() + 0.3 * (4.0 * PI * x).cos() * (1.0 + t)
    })
    .unwrap()
}

fn diagnostics_exactness() -> Report {
    let mut rep = Report::new();
    let mut worst = 0.0_f64;
    for &(c, r) in &[(1.7, 0.3), (-0.4, 0.2), (2.5, 0.45)] {
        let grad = Trajectory::from_fn(64, 1.0, 0.0, 1e-3, 200, |_, _| c).unwrap();
        let q = ParabolicCylinder::new(0.4, 0.15, r).unwrap();
        let want = 2.0 * f64::abs(c).powi(3) * r.powi(3);
        worst = worst.max((local_y_from_gradient(&grad, &q).unwrap() - want).abs() / want);
    }
    rep.check(worst <= 1e-10, format!("Y for constant u_x vs 2|c|^3 r^3: rel {worst:.2e}"));

    let lambda = 2.0_f64;
    let u = |x: f64, t: f64| (2.0 * PI * x).sin() * (-t).exp() + 0.4 * (6.0 * PI * x + 1.0).cos();
    let base = Trajectory::from_fn(128, 1.0, 0.0, 1e-3, 201, u).unwrap();
    let scaled = Trajectory::from_fn(128, 1.0 / lambda, 0.0, 1e-3 / lambda.powi(4), 201, |x, t| {
        u(lambda * x, lambda.powi(4) * t)
    })
    .unwrap();
    let q = ParabolicCylinder::new(0.3, 0.18, 0.35).unwrap();
    let qs = ParabolicCylinder::new(0.3 / lambda, 0.18 / lambda.powi(4), 0.35 / lambda).unwrap();
    let (y, ys) = (local_y(&base, &q).unwrap(), local_y(&scaled, &qs).unwrap());
    let rel = (y - ys).abs() / y;
    rep.check(rel <= 1e-3, format!("Y scale invariance (lambda = 2): {y:.6} vs {ys:.6}, rel {rel:.2e}"));

    let traj = smooth_solution(64, 4001, 2e-4);
    let grad = gradient(&traj).unwrap();
    let pairs = [(3.0, 3.0), (4.0, 8.0), (6.0, 6.0), (3.0, f64::INFINITY), (f64::INFINITY, 5.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut failures = 0;
    for _ in 0..100 {
        let r: f64 = rng.gen_range(0.18..0.5);
        let top = rng.gen_range(r.powi(4)..0.8);
        let q = ParabolicCylinder::new(rng.gen_range(0.0..1.0), top, r).unwrap();
        let (a, b) = pairs[rng.gen_range(0..pairs.len())];
        let e = |p: f64| if p.is_finite() { Exponent::Finite(p) } else { Exponent::Infinite };
        let check = serrin_y_bound(&grad, &q, &MixedExponents::new(e(a), e(b))).unwrap();
        if !check.holds(0.05) {
            failures += 1;
        }
    }
    rep.check(failures == 0, format!("Hölder chain on 100 random cylinders: {failures} violations"));

    let cylinders: Vec<ParabolicCylinder> = (0..8)
        .map(|i| ParabolicCylinder::new(0.125 * i as f64, 0.3 + 0.05 * i as f64, 0.45).unwrap())
        .collect();
    let max_ratio = |traj: &Trajectory| {
        cylinders
            .iter()
            .map(|q| poincare_residual(traj, q, PoincareVariant::Cubic).unwrap().ratio)
            .fold(0.0, f64::max)
    };
    let coarse = max_ratio(&smooth_solution(64, 1601, 5e-4));
    let fine = max_ratio(&smooth_solution(128, 3201, 2.5e-4));
    let drift = (coarse - fine).abs() / fine;
    rep.check(drift < 0.1, format!("Poincaré max ratio {coarse:.5} -> {fine:.5}, drift {:.2}%", 100.0 * drift));
    rep
}

fn ladder_arithmetic() -> Report {
    let mut rep = Report::new();
    let e = |p: f64| if p.is_finite() { Exponent::Finite(p) } else { Exponent::Infinite };
    let chain = [2.0, 3.0, 7.0, f64::INFINITY];
    for w in chain.windows(2) {
        let from = MixedExponents::diagonal(e(w[0]));
        let to = MixedExponents::diagonal(e(w[1]));
        let (lhs, rhs) = (from.index(), to.index() + 1.0);
        rep.check(lhs < rhs, format!("({0},{0}) -> ({1},{1}): {lhs:.4} < {rhs:.4}", w[0], w[1]));
    }
    let table = [
        (f64::INFINITY, 4.0, Criticality::Critical),
        (f64::INFINITY, 5.0, Criticality::Subcritical),
        (3.0, f64::INFINITY, Criticality::Subcritical),
        (2.0, 8.0, Criticality::Critical),
        (2.0, 2.0, Criticality::Supercritical),
        (1.0, f64::INFINITY, Criticality::ExcludedEndpoint),
    ];
    for (q, qt, want) in table {
        let got = MixedExponents::new(e(q), e(qt)).criticality().1;
        rep.check(got == want, format!("(q, q') = ({q}, {qt}): {got}"));
    }
    rep
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn cli_determinism() -> Report {
    let mut rep = Report::new();
    let root = tempfile::tempdir().unwrap();
    let sim_dir = root.path().join("simulate-a");
    let checkpoint = sim_dir.join("trajectory.csv");
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("kernel-table", vec!["r_max=4".into(), "r_step=0.1".into()]),
        (
            "simulate",
            vec!["n=32".into(), "t_final=0.2".into(), "save_every=2".into(), "seed=3".into()],
        ),
        ("diagnose", vec![format!("checkpoint={}", checkpoint.display()), "radii=0.6,0.5,0.45".into()]),
        (
            "picard",
            vec!["n=64".into(), "frames=33".into(), "base_n=32".into(), "base_frames=16".into(), "levels=2".into(), "trials=10".into()],
        ),
        (
            "verify-estimates",
            vec!["base_n=32".into(), "base_frames=16".into(), "levels=2".into(), "trials=10".into()],
        ),
    ];
    for (cmd, sets) in &commands {
        let mut outputs = Vec::new();
        for tag in ["a", "b"] {
            let dir = root.path().join(format!("{cmd}-{tag}"));
            let mut args = vec!["sgm".to_string(), cmd.to_string(), "--out".into(), dir.display().to_string()];
            for s in sets {
                args.push("--set".into());
                args.push(s.clone());
            }
            let code = sgm::cli::run(&args);
            rep.check(code == 0, format!("{cmd} run {tag}: exit code {code}"));
            outputs.push(dir_contents(&dir));
        }
        let same = !outputs[0].is_empty() && outputs[0] == outputs[1];
        let names: Vec<&String> = outputs[0].keys().collect();
        rep.check(same, format!("{cmd}: byte-identical {names:?}"));
    }
    rep
}

fn main() {
    let criteria: [(&str, fn() -> Report); 9] = [
        ("kernel decay laws", kernel_decay_laws),
        ("kernel identities", kernel_identities),
        ("spectral identities", spectral_identities),
        ("solver correctness", solver_correctness),
        ("mild-solution suite", mild_solutions),
        ("convolution-estimate stability", estimate_stability),
        ("diagnostics exactness", diagnostics_exactness),
        ("exponent-ladder arithmetic", ladder_arithmetic),
        ("determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let rep = panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Report {
                ok: false,
                lines: vec![format!("FAIL panicked: {msg}")],
            }
        });
        let verdict = if rep.ok { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {}: {name} ({:.1} s)", i + 1, start.elapsed().as_secs_f64());
        for line in &rep.lines {
            println!("       {line}");
        }
        if !rep.ok {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
