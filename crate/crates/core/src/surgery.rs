//! Removing a single level from the spectrum by clipping sorted eigenvalue
//! curves in the path's own nodewise eigenframes.
//!
//! Curves `0..threshold` are pushed down to at most `level - eta`, the rest
//! up to at least `level + eta`. Because the edit happens inside each node's
//! eigenframe, the node perturbation norm equals the largest curve
//! excursion, and since `y - x` is affine on every segment its sup-norm is
//! attained at a node.

use serde::{Deserialize, Serialize};

use crate::eig::{eig_curves_with, EigCurves, DEFAULT_EIG_TOL};
use crate::error::{FsaError, Result};
use crate::matrix::CMat;
use crate::path::MatPath;
use crate::spectrum::{check_removability, level_gap, Feasibility, GapCert, LevelStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Down,
    Up,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurgeryPlan {
    pub level: f64,
    pub budget: f64,
    /// Number of curves pushed down; curve `k` goes down iff `k < threshold`.
    pub threshold: usize,
    pub eta: f64,
    pub directions: Vec<Direction>,
    /// Largest node excursion `|μ_k - λ_k|` per curve.
    pub excursions: Vec<f64>,
}

impl SurgeryPlan {
    pub fn max_excursion(&self) -> f64 {
        self.excursions.iter().copied().fold(0.0, f64::max)
    }
}

/// Chooses directions and the clip margin for removing `level` within `budget`.
///
/// Valid thresholds form a range: every curve below it must be
/// down-feasible and every curve from it on up-feasible. Inside that range
/// the threshold is the number of curves whose certified midpoint lies
/// below the level, so a curve keeps the side it mostly lives on.
pub fn plan_surgery(curves: &EigCurves, level: f64, budget: f64) -> Result<SurgeryPlan> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(FsaError::InvalidBudget(budget));
    }
    let feas = check_removability(curves, level, budget);
    for f in &feas {
        if let Feasibility::Obstructed(cert) = f {
            return Err(FsaError::LevelObstructed(*cert));
        }
    }
    if let Some(curve) = feas.iter().position(|f| matches!(f, Feasibility::Inconclusive)) {
        return Err(FsaError::InconclusiveGrid {
            level,
            budget,
            curve,
        });
    }

    let n = curves.n();
    let ranges: Vec<_> = (0..n).map(|k| curves.curve_range(k)).collect();
    let max_down = feas.iter().take_while(|f| f.down()).count();
    let min_down = feas.iter().rposition(|f| !f.up()).map_or(0, |k| k + 1);
    if min_down > max_down {
        // A curve that is neither down- nor up-feasible was classified above;
        // this only trips if sorted order is violated.
        return Err(FsaError::CertificationFailed(format!(
            "no monotone split at level {level}: curves 0..{min_down} must go down, only 0..{max_down} can"
        )));
    }
    let below = ranges.iter().filter(|r| (r.lo + r.hi) / 2.0 < level).count();
    let threshold = below.clamp(min_down, max_down);

    let mut eta = budget / 4.0;
    for (k, r) in ranges.iter().enumerate() {
        let slack = if k < threshold {
            level + budget - r.hi
        } else {
            r.lo - (level - budget)
        };
        eta = eta.min(slack / 2.0);
    }
    debug_assert!(eta > 0.0);

    let directions: Vec<Direction> = (0..n)
        .map(|k| if k < threshold { Direction::Down } else { Direction::Up })
        .collect();
    let mut plan = SurgeryPlan {
        level,
        budget,
        threshold,
        eta,
        directions,
        excursions: vec![0.0; n],
    };
    let mu = clip_curves(curves, &plan);
    for (j, row) in mu.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            let e = (v - curves.value(j, k)).abs();
            plan.excursions[k] = plan.excursions[k].max(e);
        }
    }
    Ok(plan)
}

/// New node eigenvalues `μ[j][k]`, outside `(level - eta, level + eta)`.
pub fn clip_curves(curves: &EigCurves, plan: &SurgeryPlan) -> Vec<Vec<f64>> {
    let low = plan.level - plan.eta;
    let high = plan.level + plan.eta;
    (0..=curves.m())
        .map(|j| {
            curves
                .node_values(j)
                .iter()
                .enumerate()
                .map(|(k, &v)| if k < plan.threshold { v.min(low) } else { v.max(high) })
                .collect()
        })
        .collect()
}

/// `y(s_j) = U_j diag(μ_j) U_j*`. Nodes whose eigenvalues are unchanged are
/// copied from `x` bit for bit.
pub fn reassemble(x: &MatPath, curves: &EigCurves, mu: &[Vec<f64>]) -> Result<MatPath> {
    if mu.len() != x.m() + 1 || curves.m() != x.m() || curves.n() != x.n() {
        return Err(FsaError::DimensionMismatch {
            expected: format!("{} nodes of size {}", x.m() + 1, x.n()),
            found: format!("{} eigenvalue rows", mu.len()),
        });
    }
    let nodes = mu
        .iter()
        .enumerate()
        .map(|(j, values)| {
            if values.as_slice() == curves.node_values(j) {
                x.node(j).clone()
            } else {
                CMat::from_eigen(curves.frame(j), values)
            }
        })
        .collect();
    MatPath::new(x.n(), x.m(), nodes)
}

/// Output of a successful level removal.
#[derive(Clone, Debug)]
pub struct LevelRemoval {
    pub y: MatPath,
    pub gap: GapCert,
    pub plan: SurgeryPlan,
    /// Curves of `y`.
    pub curves: EigCurves,
    /// Certified `sup_norm(y - x)`.
    pub perturbation: f64,
    pub changed: bool,
}

pub fn remove_level(x: &MatPath, level: f64, budget: f64) -> Result<LevelRemoval> {
    let curves = x.curves()?;
    remove_level_with(x, &curves, level, budget, DEFAULT_EIG_TOL)
}

/// [`remove_level`] with precomputed curves of `x`.
pub fn remove_level_with(
    x: &MatPath,
    curves: &EigCurves,
    level: f64,
    budget: f64,
    eig_tol: f64,
) -> Result<LevelRemoval> {
    let plan = plan_surgery(curves, level, budget)?;
    let mu = clip_curves(curves, &plan);
    let changed = (0..=x.m()).any(|j| mu[j].as_slice() != curves.node_values(j));
    let (y, y_curves) = if changed {
        let y = reassemble(x, curves, &mu)?;
        let c = eig_curves_with(&y, eig_tol)?;
        (y, c)
    } else {
        (x.clone(), curves.clone())
    };
    let gap = match level_gap(&y_curves, level) {
        LevelStatus::Gap(g) => g,
        LevelStatus::Hit(hit) => {
            return Err(FsaError::CertificationFailed(format!(
                "after surgery at level {level} the enclosure [{}, {}] of curve {} on segment {} still contains it; refine the grid",
                hit.enclosure.lo, hit.enclosure.hi, hit.curve, hit.segment
            )))
        }
    };
    let perturbation = if changed {
        y.sub(x)?.sup_norm().value
    } else {
        0.0
    };
    if perturbation.is_nan() || perturbation >= budget {
        return Err(FsaError::CertificationFailed(format!(
            "surgery at level {level} moved the path by {perturbation}, budget {budget}"
        )));
    }
    Ok(LevelRemoval {
        y,
        gap,
        plan,
        curves: y_curves,
        perturbation,
        changed,
    })
}
