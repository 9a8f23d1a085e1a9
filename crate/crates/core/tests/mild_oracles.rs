mod common;

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::band_limited;
use sgm::mild::{
    assemble_fv, duhamel, mollify, mollify_checked, picard_solve, representation_residual, CutoffFunction,
};
use sgm::spectral::derivative;
use sgm::{Exponent, GridField, MixedExponents, ParabolicCylinder, Trajectory};

fn velocity(x: f64, t: f64) -> f64 {
    (2.0 * PI * x).sin() * (1.0 + 3.0 * t) + 0.3 * (4.0 * PI * x).cos()
}

fn velocity_t(x: f64, _t: f64) -> f64 {
    3.0 * (2.0 * PI * x).sin()
}

fn cutoff() -> CutoffFunction {
    let q = ParabolicCylinder::new(0.5, 0.04, 0.4472).unwrap();
    CutoffFunction::for_cylinder(&q, 1.0, 0.6).unwrap()
}

fn sub(a: &GridField, b: &GridField) -> GridField {
    a.zip_with(b, |x, y| x - y).unwrap()
}

fn add(a: &GridField, b: &GridField) -> GridField {
    a.zip_with(b, |x, y| x + y).unwrap()
}

fn mul(a: &GridField, b: &GridField) -> GridField {
    a.zip_with(b, |x, y| x * y).unwrap()
}

/// `(φv)_t + (φv)_xxxx + (φv²)_xxx - φ (v_t + v_xxxx + (v²)_xxx)`.
fn commutator(c: &CutoffFunction, n: usize, t: f64) -> GridField {
    let h = 1e-6;
    let phi = GridField::from_fn(n, 1.0, |x| c.value(x, t)).unwrap();
    let phi_t = GridField::from_fn(n, 1.0, |x| (c.value(x, t + h) - c.value(x, t - h)) / (2.0 * h)).unwrap();
    let v = GridField::from_fn(n, 1.0, |x| velocity(x, t)).unwrap();
    let vt = GridField::from_fn(n, 1.0, |x| velocity_t(x, t)).unwrap();
    let v2 = mul(&v, &v);
    let pv = mul(&phi, &v);
    let lhs = add(
        &add(&add(&mul(&phi_t, &v), &mul(&phi, &vt)), &derivative(&pv, 4)),
        &derivative(&mul(&phi, &v2), 3),
    );
    let inner = add(&add(&vt, &derivative(&v, 4)), &derivative(&v2, 3));
    sub(&lhs, &mul(&phi, &inner))
}

#[test]
fn localized_source_matches_the_commutator() {
    let n = 1024;
    let c = cutoff();
    let v = Trajectory::from_fn(n, 1.0, 0.0, 1e-3, 41, velocity).unwrap();
    let fv = assemble_fv(&v, &c).unwrap();
    let scale = fv.max_abs();
    assert!(scale > 1.0);
    for (j, &t) in v.times().iter().enumerate().skip(1).step_by(5) {
        let err = fv.frames()[j].max_abs_diff(&commutator(&c, n, t));
        assert!(err < 1e-6 * scale, "t={t}: {err} against {scale}");
    }
}

#[test]
fn duhamel_of_a_constant_mode() {
    let mu = (2.0 * PI).powi(4);
    let src = Trajectory::from_fn(64, 1.0, 0.0, 1e-3, 51, |x, _| (2.0 * PI * x).sin()).unwrap();
    let v = duhamel(&src, 0).unwrap();
    for (f, &t) in v.frames().iter().zip(v.times()) {
        let want = GridField::from_fn(64, 1.0, |x| (1.0 - (-mu * t).exp()) / mu * (2.0 * PI * x).sin()).unwrap();
        assert!(f.max_abs_diff(&want) < 1e-15, "t={t}");
    }
}

#[test]
fn duhamel_converges_under_time_refinement() {
    let source = |x: f64, t: f64| (2.0 * PI * x).cos() * (40.0 * t).sin() + (6.0 * PI * x).sin() * t;
    let runs: Vec<Trajectory> = [21usize, 41, 81]
        .iter()
        .map(|&m| duhamel(&Trajectory::from_fn(64, 1.0, 0.0, 0.05 / (m - 1) as f64, m, source).unwrap(), 3).unwrap())
        .collect();
    let e1 = runs[0].last().max_abs_diff(runs[1].last());
    let e2 = runs[1].last().max_abs_diff(runs[2].last());
    assert!(e1 / e2 > 3.0, "{e1} {e2}");
}

#[test]
fn mollifier_keeps_constants_and_does_not_grow_norms() {
    let constant = Trajectory::from_fn(64, 1.0, 0.0, 1e-3, 60, |_, _| -1.75).unwrap();
    assert!(mollify(&constant, 0.15).unwrap().max_abs_diff(&constant) < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let exps = [
        MixedExponents::finite(2.0, 3.0).unwrap(),
        MixedExponents::finite(5.0, 1.5).unwrap(),
        MixedExponents::new(Exponent::Infinite, Exponent::Finite(4.0)),
        MixedExponents::diagonal(Exponent::Infinite),
    ];
    for i in 0..20 {
        let a = band_limited(&mut rng, 64, 1.0, 20);
        let b = band_limited(&mut rng, 64, 1.0, 20);
        let v = Trajectory::from_fn(64, 1.0, 0.0, 1e-3, 60, |x, t| {
            let j = ((x * 64.0).round() as usize) % 64;
            a.samples()[j] * (200.0 * t).cos() + b.samples()[j] * t
        })
        .unwrap();
        for e in &exps {
            let m = mollify_checked(&v, 0.05 + 0.01 * i as f64, e).unwrap();
            assert!(m.norm_after <= m.norm_before * (1.0 + 1e-12));
        }
    }
}

#[test]
fn mollifier_converges_to_the_identity() {
    let v = Trajectory::from_fn(256, 1.0, 0.0, 1e-4, 201, velocity).unwrap();
    let errs: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&e| mollify(&v, e).unwrap().max_abs_diff(&v)).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[2] < 0.1 * errs[0], "{errs:?}");
}

#[test]
fn representation_residual_separates_solutions_from_perturbations() {
    let c = cutoff();
    let v = Trajectory::from_fn(64, 1.0, 0.0, 1e-3, 41, |x, t| 0.05 * velocity(x, t)).unwrap();
    let exps = MixedExponents::finite(4.0, 8.0).unwrap();
    let (w, report) = picard_solve(&v, &c, &exps, 1e-12, 60).unwrap();
    assert!(report.converged);
    assert!(representation_residual(&w, &v, &c).unwrap() < 1e-7);
    let bumped = Trajectory::from_fn(64, 1.0, 0.0, 1e-3, 41, |x, t| {
        let j = ((x * 64.0).round() as usize) % 64;
        let k = ((t / 1e-3).round() as usize).min(40);
        w.frames()[k].samples()[j] + 1e-3 * (2.0 * PI * x).cos() * t / 0.04
    })
    .unwrap();
    assert!(representation_residual(&bumped, &v, &c).unwrap() >= 1e-4);
}
