//! Elements of C([0,1], Mₙ(ℂ)) represented by their values on the uniform
//! grid `s_j = j/m`, affine between nodes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::eig::{eig_curves, operator_norm, EigCurves};
use crate::error::{FsaError, Result};
use crate::matrix::CMat;

/// Defect above which loading an element file logs a warning.
pub const HERMITIAN_WARN_TOL: f64 = 1e-6;

/// Matrix path sampled on a uniform grid.
///
/// Paths built with [`MatPath::new`] are symmetrized node by node and are
/// exactly self-adjoint. [`MatPath::general`] keeps nodes as given; products
/// of self-adjoint paths are general paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ElementFile", into = "ElementFile")]
pub struct MatPath {
    n: usize,
    m: usize,
    nodes: Vec<CMat>,
}

/// Upper bound for the sup over `[0, 1]` of the operator norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedBound {
    pub value: f64,
    pub node_max: f64,
    pub inflation: f64,
}

impl MatPath {
    /// Builds a self-adjoint path; each node is replaced by `(H + H*) / 2`.
    pub fn new(n: usize, m: usize, nodes: Vec<CMat>) -> Result<Self> {
        let mut path = Self::general(n, m, nodes)?;
        for h in &mut path.nodes {
            *h = h.hermitian_part();
        }
        Ok(path)
    }

    /// Builds a path without symmetrizing.
    pub fn general(n: usize, m: usize, nodes: Vec<CMat>) -> Result<Self> {
        if m == 0 {
            return Err(FsaError::NoSegments);
        }
        if n == 0 {
            return Err(FsaError::EmptyMatrix);
        }
        if nodes.len() != m + 1 {
            return Err(FsaError::DimensionMismatch {
                expected: format!("{} nodes", m + 1),
                found: format!("{} nodes", nodes.len()),
            });
        }
        if let Some(bad) = nodes.iter().find(|h| h.n() != n) {
            return Err(FsaError::DimensionMismatch {
                expected: format!("{n}x{n}"),
                found: format!("{0}x{0}", bad.n()),
            });
        }
        Ok(Self { n, m, nodes })
    }

    /// Self-adjoint path sampled from `f` at the grid nodes.
    pub fn from_fn(n: usize, m: usize, f: impl Fn(f64) -> CMat) -> Result<Self> {
        let nodes = (0..=m).map(|j| f(j as f64 / m as f64)).collect();
        Self::new(n, m, nodes)
    }

    /// 1×1 path with the given node values.
    pub fn scalar(values: &[f64]) -> Result<Self> {
        let m = values.len().checked_sub(1).ok_or(FsaError::NoSegments)?;
        Self::new(1, m, values.iter().map(|&v| CMat::diag(&[v])).collect())
    }

    pub fn constant(h: &CMat, m: usize) -> Result<Self> {
        Self::new(h.n(), m, vec![h.clone(); m + 1])
    }

    pub fn zero(n: usize, m: usize) -> Result<Self> {
        Self::constant(&CMat::zeros(n), m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> &[CMat] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> &CMat {
        &self.nodes[j]
    }

    /// Grid parameter of node `j`.
    pub fn s(&self, j: usize) -> f64 {
        j as f64 / self.m as f64
    }

    /// Value of the affine interpolant at `s ∈ [0, 1]`.
    pub fn eval(&self, s: f64) -> CMat {
        let s = s.clamp(0.0, 1.0);
        let pos = s * self.m as f64;
        let j = (pos.floor() as usize).min(self.m - 1);
        let u = pos - j as f64;
        if u == 0.0 {
            self.nodes[j].clone()
        } else if u == 1.0 {
            self.nodes[j + 1].clone()
        } else {
            self.nodes[j].lerp(&self.nodes[j + 1], u)
        }
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.nodes.iter().all(CMat::is_hermitian)
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.m != other.m {
            return Err(FsaError::DimensionMismatch {
                expected: format!("n={}, m={}", self.n, self.m),
                found: format!("n={}, m={}", other.n, other.m),
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Result<Self> {
        self.check_shape(other)?;
        Ok(Self {
            n: self.n,
            m: self.m,
            nodes: self.nodes.iter().zip(&other.nodes).map(|(a, b)| f(a, b)).collect(),
        })
    }

    fn map(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        Self {
            n: self.n,
            m: self.m,
            nodes: self.nodes.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product. The grid samples the product of the two
    /// interpolants exactly at the nodes only.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scalar_mul(&self, c: f64) -> Self {
        self.map(|a| a.scale(c))
    }

    pub fn adjoint(&self) -> Self {
        self.map(CMat::adjoint)
    }

    /// `x - t·1`.
    pub fn shift(&self, t: f64) -> Self {
        self.map(|a| a.shift_diag(t))
    }

    /// Sup-norm bound.
    ///
    /// The operator norm is convex and each segment is affine, so the sup over
    /// a segment is attained at one of its endpoints: the node maximum is
    /// already the bound and no inflation is needed.
    pub fn sup_norm(&self) -> CertifiedBound {
        use rayon::prelude::*;
        let node_max = self
            .nodes
            .par_iter()
            .map(operator_norm)
            .reduce(|| 0.0, f64::max);
        CertifiedBound {
            value: node_max,
            node_max,
            inflation: 0.0,
        }
    }

    pub fn curves(&self) -> Result<EigCurves> {
        eig_curves(self)
    }

    pub fn to_element_file(&self) -> ElementFile {
        ElementFile::from(self.clone())
    }

    /// Canonical JSON text of the element.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("element serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// SHA-256 (hex) of the canonical JSON text.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    /// Largest entry-wise difference to another path of the same shape.
    pub fn max_entry_diff(&self, other: &Self) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self
            .nodes
            .iter()
            .zip(&other.nodes)
            .map(|(a, b)| (a - b).max_abs())
            .fold(0.0, f64::max))
    }
}

/// On-disk element format: `nodes[j][row][col] = [re, im]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementFile {
    pub n: usize,
    pub m: usize,
    pub nodes: Vec<Vec<Vec<[f64; 2]>>>,
}

impl From<MatPath> for ElementFile {
    fn from(p: MatPath) -> Self {
        let nodes = p
            .nodes
            .iter()
            .map(|h| {
                h.to_rows()
                    .into_iter()
                    .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
                    .collect()
            })
            .collect();
        Self {
            n: p.n,
            m: p.m,
            nodes,
        }
    }
}

impl TryFrom<ElementFile> for MatPath {
    type Error = FsaError;

    fn try_from(f: ElementFile) -> Result<Self> {
        let mut mats = Vec::with_capacity(f.nodes.len());
        for (j, node) in f.nodes.into_iter().enumerate() {
            let rows = node
                .into_iter()
                .map(|row| row.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
                .collect();
            let h = CMat::from_rows(rows)?;
            let defect = h.hermitian_defect();
            if defect > HERMITIAN_WARN_TOL {
                log::warn!("node {j}: ||H - H*|| = {defect:.3e} before symmetrization");
            }
            mats.push(h);
        }
        MatPath::new(f.n, f.m, mats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_line() {
        let x = MatPath::scalar(&[-1.0, -0.5, 0.0, 0.5, 1.0]).unwrap();
        assert_eq!((x.n(), x.m()), (1, 4));
        assert_eq!(x.eval(0.625).get(0, 0).re, 0.25);
        assert_eq!(x.sup_norm().value, 1.0);
    }

    #[test]
    fn zero_path_and_shift() {
        let z = MatPath::zero(2, 1).unwrap();
        assert_eq!(z.sup_norm().value, 0.0);
        let s = z.shift(1.0);
        for h in s.nodes() {
            assert_eq!(*h, CMat::diag(&[-1.0, -1.0]));
        }
    }

    #[test]
    fn construction_symmetrizes() {
        let bad = CMat::from_real_rows(&[&[0.0, 0.2], &[0.0, 0.0]]).unwrap();
        let x = MatPath::new(2, 2, vec![CMat::zeros(2), bad, CMat::zeros(2)]).unwrap();
        assert_eq!(*x.node(1), CMat::from_real_rows(&[&[0.0, 0.1], &[0.1, 0.0]]).unwrap());
        assert!(x.is_self_adjoint());
        assert_eq!(x.adjoint(), x);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(MatPath::new(2, 0, vec![CMat::zeros(2)]), Err(FsaError::NoSegments)));
        assert!(matches!(
            MatPath::new(2, 1, vec![CMat::zeros(2), CMat::zeros(3)]),
            Err(FsaError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            MatPath::new(2, 2, vec![CMat::zeros(2), CMat::zeros(2)]),
            Err(FsaError::DimensionMismatch { .. })
        ));
        let a = MatPath::zero(2, 2).unwrap();
        let b = MatPath::zero(2, 3).unwrap();
        assert!(a.add(&b).is_err());
    }

    #[test]
    fn algebra_examples() {
        let f = MatPath::scalar(&[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(f.add(&f.scalar_mul(-1.0)).unwrap().sup_norm().value, 0.0);
        let a = MatPath::constant(&CMat::diag(&[2.0, 3.0]), 3).unwrap();
        let b = MatPath::constant(&CMat::diag(&[5.0, 7.0]), 3).unwrap();
        let p = a.mul(&b).unwrap();
        assert!(p.nodes().iter().all(|h| *h == CMat::diag(&[10.0, 21.0])));
    }

    #[test]
    fn sup_norm_examples() {
        let c = MatPath::constant(&CMat::diag(&[0.5, -0.3]), 5).unwrap();
        let b = c.sup_norm();
        assert_eq!((b.value, b.node_max, b.inflation), (0.5, 0.5, 0.0));

        let x = MatPath::new(
            2,
            1,
            vec![CMat::zeros(2), CMat::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()],
        )
        .unwrap();
        assert!((x.sup_norm().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn general_paths_use_singular_values() {
        let n = CMat::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        let x = MatPath::general(2, 1, vec![n.clone(), n]).unwrap();
        assert!(!x.is_self_adjoint());
        assert!((x.sup_norm().value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let x = MatPath::from_fn(2, 3, |s| {
            CMat::from_rows(vec![
                vec![Complex64::new(s, 0.0), Complex64::new(0.1, -s)],
                vec![Complex64::new(0.1, s), Complex64::new(-s, 0.0)],
            ])
            .unwrap()
        })
        .unwrap();
        let text = x.to_json();
        let y = MatPath::from_json(&text).unwrap();
        assert_eq!(x, y);
        assert_eq!(y.to_json(), text);
        assert_eq!(x.digest(), y.digest());
    }
}
