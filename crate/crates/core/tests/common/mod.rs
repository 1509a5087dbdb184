#![allow(dead_code)]

use fsa_core::{operator_norm, random_hermitian_seeded, random_trig_path, CMat, Complex64, MatPath};
use proptest::prelude::*;

/// Hermitian matrix from `n + n(n-1)` reals in `[-1, 1]`.
pub fn hermitian_from(n: usize, v: &[f64]) -> CMat {
    let mut h = CMat::zeros(n);
    let mut it = v.iter().copied();
    for i in 0..n {
        h.set(i, i, Complex64::new(it.next().unwrap(), 0.0));
        for j in i + 1..n {
            let z = Complex64::new(it.next().unwrap(), it.next().unwrap());
            h.set(i, j, z);
            h.set(j, i, z.conj());
        }
    }
    h
}

pub fn hermitian(max_n: usize) -> impl Strategy<Value = CMat> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(-1.0f64..1.0, n * n)
            .prop_map(move |v| hermitian_from(n, &v))
    })
}

/// Random element of norm 0.9.
pub fn random_path(n: usize, m: usize, seed: u64) -> MatPath {
    random_trig_path(n, m, 2, seed).unwrap()
}

/// A constant Hermitian matrix of norm 0.8 plus a trig wiggle of norm `wiggle`.
pub fn slow_path(n: usize, m: usize, wiggle: f64, seed: u64) -> MatPath {
    let h = random_hermitian_seeded(n, seed ^ 0x5eed);
    let h = h.scale(0.8 / operator_norm(&h));
    let base = MatPath::constant(&h, m).unwrap();
    let w = random_trig_path(n, m, 2, seed).unwrap();
    base.add(&w.scalar_mul(wiggle / 0.9)).unwrap()
}

/// Eigenvalues of the affine interpolant at `factor` points per segment.
pub fn oversampled(x: &MatPath, factor: usize) -> Vec<(usize, f64, Vec<f64>)> {
    let m = x.m();
    let mut out = Vec::new();
    for j in 0..m {
        for r in 0..=factor {
            let s = (j as f64 + r as f64 / factor as f64) / m as f64;
            let h = x.node(j).lerp(x.node(j + 1), r as f64 / factor as f64);
            out.push((j, s, fsa_core::eig_hermitian(&h).unwrap().values));
        }
    }
    out
}
