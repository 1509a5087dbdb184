mod common;

use std::f64::consts::TAU;

use common::*;
use fsa_core::{
    eig_curves, level_gap, operator_norm, plan_surgery, remove_level, remove_level_with, CMat,
    Complex64, EigCurves, FsaError, LevelStatus, MatPath, DEFAULT_EIG_TOL,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cases() -> Vec<(MatPath, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut out = Vec::new();
    for seed in 0..60u64 {
        let n = 1 + seed as usize % 4;
        let x = if seed % 2 == 0 {
            slow_path(n, 64, 0.01, seed)
        } else {
            random_path(n, 64, seed)
        };
        for _ in 0..4 {
            let t = rng.random_range(-0.9..0.9);
            let delta = rng.random_range(0.005..0.3);
            out.push((x.clone(), t, delta));
        }
    }
    out
}

#[test]
fn successful_surgery_is_sound() {
    let mut successes = 0;
    for (x, t, delta) in cases() {
        let Ok(r) = remove_level(&x, t, delta) else { continue };
        successes += 1;
        let pert = r.y.sub(&x).unwrap().sup_norm().value;
        assert!(pert < delta, "budget: {pert} >= {delta}");
        assert_eq!(r.gap.level, t);
        assert!(r.gap.radius > 0.0);
        let LevelStatus::Gap(g) = level_gap(&eig_curves(&r.y).unwrap(), t) else {
            panic!("gap not recertified");
        };
        assert_eq!(g.radius, r.gap.radius);
        for (_, _, values) in oversampled(&r.y, 10) {
            for v in values {
                assert!((v - t).abs() >= g.radius, "oversampled {v} inside gap at {t}");
            }
        }
        for j in 0..=x.m() {
            let mu = r.curves.node_values(j);
            assert!(mu.windows(2).all(|w| w[0] <= w[1]));
        }
    }
    assert!(successes >= 20, "only {successes} successes");
}

#[test]
fn errors_are_classified() {
    for (x, t, delta) in cases() {
        match remove_level(&x, t, delta) {
            Ok(_)
            | Err(FsaError::LevelObstructed(_))
            | Err(FsaError::InconclusiveGrid { .. })
            | Err(FsaError::CertificationFailed(_)) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}

#[test]
fn gapped_input_is_left_alone() {
    let mut checked = 0;
    for (x, t, delta) in cases() {
        let c = eig_curves(&x).unwrap();
        let Ok(plan) = plan_surgery(&c, t, delta) else { continue };
        if level_gap(&c, t).radius() >= plan.eta {
            let r = remove_level(&x, t, delta).unwrap();
            assert!(!r.changed);
            assert_eq!(r.y, x);
            checked += 1;
        }
    }
    assert!(checked > 0);
}

fn unitary2(rng: &mut ChaCha8Rng) -> [[Complex64; 2]; 2] {
    let th: f64 = rng.random_range(0.0..TAU);
    let a: f64 = rng.random_range(0.0..TAU);
    let b: f64 = rng.random_range(0.0..TAU);
    let e = |p: f64| Complex64::from_polar(1.0, p);
    [
        [e(a) * th.cos(), -e(b) * th.sin()],
        [e(-b) * th.sin(), e(-a) * th.cos()],
    ]
}

/// Rotates the frame columns of the degenerate pair (1, 2).
fn rotate_pair(frame: &CMat, w: [[Complex64; 2]; 2]) -> CMat {
    let mut out = frame.clone();
    for i in 0..frame.n() {
        let (u, v) = (frame.get(i, 1), frame.get(i, 2));
        out.set(i, 1, u * w[0][0] + v * w[1][0]);
        out.set(i, 2, u * w[0][1] + v * w[1][1]);
    }
    out
}

#[test]
fn result_does_not_depend_on_degenerate_basis() {
    let v = fsa_core::eig_hermitian(&fsa_core::random_hermitian_seeded(3, 77))
        .unwrap()
        .vectors;
    let x = MatPath::from_fn(3, 32, |s| {
        let f = 0.3 + 0.02 * (TAU * s).sin();
        CMat::from_eigen(&v, &[-0.4 + 0.1 * s, f, f])
    })
    .unwrap();
    let c = eig_curves(&x).unwrap();
    let base = remove_level_with(&x, &c, 0.31, 0.1, DEFAULT_EIG_TOL).unwrap();
    let base_dist: Vec<f64> = (0..=32)
        .map(|j| operator_norm(&(base.y.node(j) - x.node(j))))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let frames = c.frames().iter().map(|f| rotate_pair(f, unitary2(&mut rng))).collect();
        let lambda = (0..=32).map(|j| c.node_values(j).to_vec()).collect();
        let rotated = EigCurves::from_parts(lambda, frames, c.seg_vars().to_vec()).unwrap();
        let r = remove_level_with(&x, &rotated, 0.31, 0.1, DEFAULT_EIG_TOL).unwrap();
        assert!((r.gap.radius - base.gap.radius).abs() <= 1e-10);
        for (j, want) in base_dist.iter().enumerate() {
            let d = operator_norm(&(r.y.node(j) - x.node(j)));
            assert!((d - want).abs() <= 1e-10);
        }
    }
}
