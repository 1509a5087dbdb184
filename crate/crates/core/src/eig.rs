//! Hermitian eigendecomposition, sorted eigenvalue curves along a path, and
//! per-segment eigenvalue enclosures.
//!
//! Curves are matched by sorted index: curve `k` is the `k`-th smallest
//! eigenvalue at every node. Sorted eigenvalues are 1-Lipschitz in the
//! operator norm (Weyl), which is what makes the segment enclosures sound:
//! on an affine segment from `A` to `B` with `L = ||B - A||`, the value
//! `λ_k` at parameter `u` lies within `u·L` of `λ_k(A)` and within `(1-u)·L`
//! of `λ_k(B)`. Intersecting the two cones over `u ∈ [0, 1]` gives the
//! hull of the endpoint values inflated by `max(0, (L - |Δλ_k|) / 2)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FsaError, Result};
use crate::matrix::CMat;
use crate::path::MatPath;

/// Stopping rule: off-diagonal Frobenius mass relative to `||H||_F`.
pub const DEFAULT_EIG_TOL: f64 = 1e-14;
pub const MAX_SWEEPS: usize = 100;
/// Inputs whose `||H - H*||_F` exceeds this fraction of `1 + ||H||_F` are rejected.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Enclosures are padded by `ENCLOSURE_PAD · n · ulp · (1 + node norm)` to
/// absorb eigensolver rounding.
const ENCLOSURE_PAD: f64 = 16.0;

/// Closed real interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Distance from `v` to the interval, zero inside.
    pub fn distance(&self, v: f64) -> f64 {
        if v < self.lo {
            self.lo - v
        } else if v > self.hi {
            v - self.hi
        } else {
            0.0
        }
    }
}

/// Eigenvalues in ascending order with the matching unitary frame:
/// `H = vectors · diag(values) · vectors*`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn eig_hermitian(h: &CMat) -> Result<HermitianEig> {
    eig_hermitian_with(h, DEFAULT_EIG_TOL)
}

/// Cyclic complex Jacobi.
///
/// Each rotation first removes the phase of `a_pq` with a diagonal unitary,
/// then applies a real Jacobi rotation to the resulting real symmetric 2×2
/// block. Sweeps stop once the off-diagonal Frobenius mass is at most
/// `tol · ||H||_F`.
pub fn eig_hermitian_with(h: &CMat, tol: f64) -> Result<HermitianEig> {
    let n = h.n();
    if n == 0 {
        return Err(FsaError::EmptyMatrix);
    }
    let fro = h.frobenius();
    let defect = h.hermitian_defect();
    if defect > HERMITIAN_TOL * (1.0 + fro) {
        return Err(FsaError::NotHermitian { defect });
    }
    let mut a = h.hermitian_part();
    let mut u = CMat::identity(n);

    let mut converged = false;
    let mut off = off_diagonal_mass(&a);
    for _ in 0..MAX_SWEEPS {
        if off <= tol * fro {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut u, p, q);
            }
        }
        off = off_diagonal_mass(&a);
    }
    if !converged && off > tol * fro {
        return Err(FsaError::NoConvergence {
            sweeps: MAX_SWEEPS,
            off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    let values = order.iter().map(|&i| a.get(i, i).re).collect();
    let vectors = CMat::from_fn(n, |r, c| u.get(r, order[c]));
    Ok(HermitianEig { values, vectors })
}

fn off_diagonal_mass(a: &CMat) -> f64 {
    let n = a.n();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a.get(i, j).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn rotate(a: &mut CMat, u: &mut CMat, p: usize, q: usize) {
    let apq = a.get(p, q);
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let n = a.n();
    let w = apq / mag;
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // J = diag(1, conj(w)) · [[c, s], [-s, c]] on the (p, q) plane.
    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = -w.conj() * s;
    let jqq = w.conj() * c;

    // A <- A J, U <- U J
    for k in 0..n {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, akp * jpp + akq * jqp);
        a.set(k, q, akp * jpq + akq * jqq);
        let ukp = u.get(k, p);
        let ukq = u.get(k, q);
        u.set(k, p, ukp * jpp + ukq * jqp);
        u.set(k, q, ukp * jpq + ukq * jqq);
    }
    // A <- J* A
    for k in 0..n {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, jpp.conj() * apk + jqp.conj() * aqk);
        a.set(q, k, jpq.conj() * apk + jqq.conj() * aqk);
    }
    let zero = Complex64::new(0.0, 0.0);
    a.set(p, q, zero);
    a.set(q, p, zero);
    a.set(p, p, Complex64::new(app - t * mag, 0.0));
    a.set(q, q, Complex64::new(aqq + t * mag, 0.0));
}

/// Operator (spectral) norm. Exactly-Hermitian input uses the eigenvalues
/// directly; anything else goes through `A* A`.
pub fn operator_norm(a: &CMat) -> f64 {
    if a.max_abs() == 0.0 {
        return 0.0;
    }
    if a.is_hermitian() {
        let e = eig_hermitian(a).expect("exact Hermitian input");
        return e.values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
    }
    let gram = (&a.adjoint() * a).hermitian_part();
    let e = eig_hermitian(&gram).expect("Gram matrix is Hermitian");
    e.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Sorted eigenvalue curves of a self-adjoint path.
#[derive(Clone, Debug, PartialEq)]
pub struct EigCurves {
    n: usize,
    m: usize,
    /// `lambda[j][k]`: k-th smallest eigenvalue at node `j`.
    lambda: Vec<Vec<f64>>,
    frames: Vec<CMat>,
    /// `||x(s_{j+1}) - x(s_j)||` per segment.
    seg_var: Vec<f64>,
    node_norm: Vec<f64>,
}

pub fn eig_curves(x: &MatPath) -> Result<EigCurves> {
    eig_curves_with(x, DEFAULT_EIG_TOL)
}

pub fn eig_curves_with(x: &MatPath, tol: f64) -> Result<EigCurves> {
    let decomps: Vec<HermitianEig> = x
        .nodes()
        .par_iter()
        .map(|h| eig_hermitian_with(h, tol))
        .collect::<Result<_>>()?;
    let seg_var: Vec<f64> = x
        .nodes()
        .par_windows(2)
        .map(|w| operator_norm(&(&w[1] - &w[0])))
        .collect();
    let node_norm = decomps
        .iter()
        .map(|d| d.values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs())))
        .collect();
    let (lambda, frames) = decomps.into_iter().map(|d| (d.values, d.vectors)).unzip();
    Ok(EigCurves {
        n: x.n(),
        m: x.m(),
        lambda,
        frames,
        seg_var,
        node_norm,
    })
}

impl EigCurves {
    /// Assembles curves from precomputed parts. Used to substitute frames
    /// inside degenerate eigenspaces.
    pub fn from_parts(
        lambda: Vec<Vec<f64>>,
        frames: Vec<CMat>,
        seg_var: Vec<f64>,
    ) -> Result<Self> {
        let m = seg_var.len();
        if m == 0 {
            return Err(FsaError::NoSegments);
        }
        let n = lambda.first().map_or(0, Vec::len);
        if lambda.len() != m + 1 || frames.len() != m + 1 {
            return Err(FsaError::DimensionMismatch {
                expected: format!("{} nodes", m + 1),
                found: format!("{} values, {} frames", lambda.len(), frames.len()),
            });
        }
        if lambda.iter().any(|l| l.len() != n) || frames.iter().any(|f| f.n() != n) {
            return Err(FsaError::DimensionMismatch {
                expected: format!("n = {n}"),
                found: "ragged node data".into(),
            });
        }
        let node_norm = lambda
            .iter()
            .map(|l| l.iter().fold(0.0, |acc: f64, v| acc.max(v.abs())))
            .collect();
        Ok(Self {
            n,
            m,
            lambda,
            frames,
            seg_var,
            node_norm,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Eigenvalues at node `j`, ascending.
    pub fn node_values(&self, j: usize) -> &[f64] {
        &self.lambda[j]
    }

    pub fn value(&self, j: usize, k: usize) -> f64 {
        self.lambda[j][k]
    }

    pub fn frame(&self, j: usize) -> &CMat {
        &self.frames[j]
    }

    pub fn frames(&self) -> &[CMat] {
        &self.frames
    }

    pub fn seg_var(&self, j: usize) -> f64 {
        self.seg_var[j]
    }

    pub fn seg_vars(&self) -> &[f64] {
        &self.seg_var
    }

    /// Largest |λ| at node `j`.
    pub fn node_norm(&self, j: usize) -> f64 {
        self.node_norm[j]
    }

    /// Values of curve `k` at all nodes.
    pub fn curve(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.lambda.iter().map(move |l| l[k])
    }

    /// Interval containing `λ_k` of the affine interpolant on segment `j`.
    pub fn segment_enclosure(&self, j: usize, k: usize) -> Interval {
        let a = self.lambda[j][k];
        let b = self.lambda[j + 1][k];
        let l = self.seg_var[j];
        let r = ((l - (b - a).abs()) / 2.0).max(0.0);
        let scale = 1.0 + self.node_norm[j].max(self.node_norm[j + 1]) + l;
        let pad = ENCLOSURE_PAD * self.n as f64 * f64::EPSILON * scale;
        Interval::new(a.min(b) - r - pad, a.max(b) + r + pad)
    }

    pub fn checked_enclosure(&self, j: usize, k: usize) -> Result<Interval> {
        if j >= self.m || k >= self.n {
            return Err(FsaError::OutOfRange(format!(
                "segment {j} of {}, curve {k} of {}",
                self.m, self.n
            )));
        }
        Ok(self.segment_enclosure(j, k))
    }

    /// Iterates `(segment, curve, enclosure)` over every enclosure.
    pub fn enclosures(&self) -> impl Iterator<Item = (usize, usize, Interval)> + '_ {
        (0..self.m)
            .flat_map(move |j| (0..self.n).map(move |k| (j, k, self.segment_enclosure(j, k))))
    }

    /// Certified `(inf, sup)` of curve `k` over `[0, 1]`.
    pub fn curve_range(&self, k: usize) -> Interval {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..self.m {
            let e = self.segment_enclosure(j, k);
            lo = lo.min(e.lo);
            hi = hi.max(e.hi);
        }
        Interval::new(lo, hi)
    }
}
