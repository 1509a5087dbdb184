//! Functional calculus `f(y) = U f(Λ) U*` for piecewise functions whose
//! jumps stay away from the spectrum, and spectral projections `χ_F(y)`.

use serde::{Deserialize, Serialize};

use crate::eig::{EigCurves, Interval};
use crate::error::{FsaError, Result};
use crate::matrix::CMat;
use crate::path::MatPath;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceValue {
    Constant { value: f64 },
    Affine { slope: f64, intercept: f64 },
}

impl PieceValue {
    fn at(&self, x: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Affine { slope, intercept } => slope * x + intercept,
        }
    }
}

/// Real function given by pieces on disjoint closed intervals, zero elsewhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseFn {
    pieces: Vec<(Interval, PieceValue)>,
}

impl PiecewiseFn {
    /// Pieces are sorted by left endpoint; overlapping pieces are rejected.
    pub fn new(mut pieces: Vec<(Interval, PieceValue)>) -> Result<Self> {
        pieces.sort_by(|a, b| a.0.lo.total_cmp(&b.0.lo));
        if let Some(w) = pieces.windows(2).find(|w| w[1].0.lo < w[0].0.hi) {
            return Err(FsaError::CertificationFailed(format!(
                "pieces [{}, {}] and [{}, {}] overlap",
                w[0].0.lo, w[0].0.hi, w[1].0.lo, w[1].0.hi
            )));
        }
        Ok(Self { pieces })
    }

    pub fn indicator(f: Interval) -> Self {
        Self {
            pieces: vec![(f, PieceValue::Constant { value: 1.0 })],
        }
    }

    pub fn constant(value: f64, support: Interval) -> Self {
        Self {
            pieces: vec![(support, PieceValue::Constant { value })],
        }
    }

    pub fn identity(support: Interval) -> Self {
        Self {
            pieces: vec![(
                support,
                PieceValue::Affine {
                    slope: 1.0,
                    intercept: 0.0,
                },
            )],
        }
    }

    pub fn pieces(&self) -> &[(Interval, PieceValue)] {
        &self.pieces
    }

    fn value_left_of(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .find(|(iv, _)| iv.lo < x && x <= iv.hi)
            .map_or(0.0, |(_, p)| p.at(x))
    }

    fn value_right_of(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .find(|(iv, _)| iv.lo <= x && x < iv.hi)
            .map_or(0.0, |(_, p)| p.at(x))
    }

    /// Piece endpoints where the one-sided limits differ.
    pub fn discontinuities(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|(iv, _)| [iv.lo, iv.hi])
            .filter(|&p| self.value_left_of(p) != self.value_right_of(p))
            .collect();
        pts.dedup();
        pts
    }

    /// Evaluates away from discontinuities. A point exactly on a
    /// discontinuity is a domain violation rather than a tie to break.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let left = self.value_left_of(x);
        let right = self.value_right_of(x);
        if left == right {
            Some(left)
        } else {
            None
        }
    }

    /// Smallest distance from a discontinuity to any enclosure of `curves`.
    pub fn domain_guard(&self, curves: &EigCurves) -> Result<f64> {
        let mut guard = f64::INFINITY;
        for p in self.discontinuities() {
            for (segment, curve, e) in curves.enclosures() {
                let d = e.distance(p);
                if d <= 0.0 {
                    return Err(FsaError::DomainViolation {
                        point: p,
                        curve,
                        segment,
                    });
                }
                guard = guard.min(d);
            }
        }
        Ok(guard)
    }
}

/// `f(y)` nodewise.
pub fn apply_fn(y: &MatPath, f: &PiecewiseFn) -> Result<MatPath> {
    let curves = y.curves()?;
    apply_fn_with(y, &curves, f)
}

pub fn apply_fn_with(y: &MatPath, curves: &EigCurves, f: &PiecewiseFn) -> Result<MatPath> {
    f.domain_guard(curves)?;
    let nodes = (0..=y.m())
        .map(|j| {
            let values = curves
                .node_values(j)
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    f.eval(v).ok_or(FsaError::DomainViolation {
                        point: v,
                        curve: k,
                        segment: j.min(y.m() - 1),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(CMat::from_eigen(curves.frame(j), &values))
        })
        .collect::<Result<Vec<_>>>()?;
    MatPath::new(y.n(), y.m(), nodes)
}

/// Spectral projection `χ_F(y)` with its diagnostics.
#[derive(Clone, Debug)]
pub struct Projection {
    pub interval: Interval,
    pub path: MatPath,
    /// Distance from the endpoints of `F` to the nearest enclosure.
    pub guard: f64,
    /// Largest `||p(s_{j+1}) - p(s_j)||`.
    pub max_jump: f64,
    /// Largest `L_j / guard`; a first-order bound on the jumps above.
    pub continuity_ratio: f64,
}

pub fn spectral_projection(y: &MatPath, f: Interval) -> Result<Projection> {
    let curves = y.curves()?;
    spectral_projection_with(y, &curves, f)
}

pub fn spectral_projection_with(y: &MatPath, curves: &EigCurves, f: Interval) -> Result<Projection> {
    let chi = PiecewiseFn::indicator(f);
    let guard = chi.domain_guard(curves)?;
    let path = apply_fn_with(y, curves, &chi)?;
    let max_jump = path
        .nodes()
        .windows(2)
        .map(|w| crate::eig::operator_norm(&(&w[1] - &w[0])))
        .fold(0.0, f64::max);
    let continuity_ratio = curves
        .seg_vars()
        .iter()
        .map(|l| l / guard)
        .fold(0.0, f64::max);
    Ok(Projection {
        interval: f,
        path,
        guard,
        max_jump,
        continuity_ratio,
    })
}

/// Orthogonality and completeness of a family of projections, maximized over nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResolutionReport {
    /// `max ||p_i^2 - p_i||`
    pub idempotence: f64,
    /// `max ||p_i - p_i*||`
    pub self_adjointness: f64,
    /// `max_{i≠j} ||p_i p_j||`
    pub orthogonality: f64,
    /// `max ||Σ p_i - I||`
    pub completeness: f64,
}

impl ResolutionReport {
    pub fn max_defect(&self) -> f64 {
        self.idempotence
            .max(self.self_adjointness)
            .max(self.orthogonality)
            .max(self.completeness)
    }
}

pub fn resolution_check(projections: &[&MatPath]) -> Result<ResolutionReport> {
    let Some(first) = projections.first() else {
        return Ok(ResolutionReport::default());
    };
    let (n, m) = (first.n(), first.m());
    if let Some(p) = projections.iter().find(|p| p.n() != n || p.m() != m) {
        return Err(FsaError::DimensionMismatch {
            expected: format!("n={n}, m={m}"),
            found: format!("n={}, m={}", p.n(), p.m()),
        });
    }
    let norm = crate::eig::operator_norm;
    let mut r = ResolutionReport::default();
    for j in 0..=m {
        let mut sum = CMat::zeros(n);
        for (a, p) in projections.iter().enumerate() {
            let pj = p.node(j);
            r.idempotence = r.idempotence.max(norm(&(&(pj * pj) - pj)));
            r.self_adjointness = r.self_adjointness.max(norm(&(pj - &pj.adjoint())));
            for q in &projections[a + 1..] {
                r.orthogonality = r.orthogonality.max(norm(&(pj * q.node(j))));
            }
            sum = &sum + pj;
        }
        r.completeness = r.completeness.max(norm(&(&sum - &CMat::identity(n))));
    }
    Ok(r)
}
