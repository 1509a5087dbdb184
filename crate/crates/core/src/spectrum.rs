//! Band decomposition of the spectrum, gap certificates around a level, and
//! per-curve removability of a level within a perturbation budget.

use serde::{Deserialize, Serialize};

use crate::eig::{EigCurves, Interval};

pub const DEFAULT_MERGE_TOL: f64 = 1e-9;

/// `(level - radius, level + radius)` meets no segment enclosure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCert {
    pub level: f64,
    pub radius: f64,
}

/// An enclosure containing the queried level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub level: f64,
    pub curve: usize,
    pub segment: usize,
    pub enclosure: Interval,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LevelStatus {
    Gap(GapCert),
    Hit(Hit),
}

impl LevelStatus {
    pub fn gap(&self) -> Option<GapCert> {
        match self {
            Self::Gap(g) => Some(*g),
            Self::Hit(_) => None,
        }
    }

    pub fn radius(&self) -> f64 {
        self.gap().map_or(0.0, |g| g.radius)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelEntry {
    pub level: f64,
    #[serde(flatten)]
    pub status: LevelStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub bands: Vec<Interval>,
    pub per_level: Vec<LevelEntry>,
}

impl SpectrumReport {
    /// Records the gap status of `level`.
    pub fn query(&mut self, curves: &EigCurves, level: f64) -> LevelStatus {
        let status = level_gap(curves, level);
        self.per_level.push(LevelEntry { level, status });
        status
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Union of all segment enclosures; intervals closer than `merge_tol` merge.
pub fn spectrum_bands(curves: &EigCurves, merge_tol: f64) -> SpectrumReport {
    let mut pieces: Vec<Interval> = curves.enclosures().map(|(_, _, e)| e).collect();
    pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
    let mut bands: Vec<Interval> = Vec::new();
    for p in pieces {
        match bands.last_mut() {
            Some(last) if p.lo <= last.hi + merge_tol => last.hi = last.hi.max(p.hi),
            _ => bands.push(p),
        }
    }
    SpectrumReport {
        bands,
        per_level: Vec::new(),
    }
}

/// Largest radius certifiable from the enclosures, or the first enclosure
/// (in segment, curve order) that contains `level`.
pub fn level_gap(curves: &EigCurves, level: f64) -> LevelStatus {
    let mut radius = f64::INFINITY;
    for (segment, curve, e) in curves.enclosures() {
        let d = e.distance(level);
        if d <= 0.0 {
            return LevelStatus::Hit(Hit {
                level,
                curve,
                segment,
                enclosure: e,
            });
        }
        radius = radius.min(d);
    }
    LevelStatus::Gap(GapCert { level, radius })
}

/// A grid node used as an obstruction witness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub node: usize,
    pub s: f64,
    pub value: f64,
}

/// Curve `curve` satisfies `λ ≤ level - budget` at `below` and
/// `λ ≥ level + budget` at `above` (node values, no inflation). By Weyl every
/// self-adjoint path within distance `< budget` has its `curve`-th eigenvalue
/// strictly below the level at one node and strictly above at the other, so
/// by continuity the level stays in its spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionCert {
    pub level: f64,
    pub budget: f64,
    pub curve: usize,
    pub below: Witness,
    pub above: Witness,
}

impl ObstructionCert {
    /// Rechecks both witness inequalities against node values.
    pub fn holds_on(&self, curves: &EigCurves) -> bool {
        let n = curves.n();
        let m = curves.m();
        if self.curve >= n || self.below.node > m || self.above.node > m {
            return false;
        }
        let lo = curves.value(self.below.node, self.curve);
        let hi = curves.value(self.above.node, self.curve);
        lo <= self.level - self.budget && hi >= self.level + self.budget
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Feasibility {
    Down,
    Up,
    Both,
    Obstructed(ObstructionCert),
    /// Neither side certifiable nor a node witness: refine the grid.
    Inconclusive,
}

impl Feasibility {
    pub fn down(&self) -> bool {
        matches!(self, Self::Down | Self::Both)
    }

    pub fn up(&self) -> bool {
        matches!(self, Self::Up | Self::Both)
    }
}

/// Per-curve removability of `level` within `budget`.
///
/// With `S_k`, `I_k` the certified sup and inf of curve `k`: down iff
/// `S_k < level + budget`, up iff `I_k > level - budget`.
pub fn check_removability(curves: &EigCurves, level: f64, budget: f64) -> Vec<Feasibility> {
    (0..curves.n())
        .map(|k| {
            let range = curves.curve_range(k);
            let down = range.hi < level + budget;
            let up = range.lo > level - budget;
            match (down, up) {
                (true, true) => Feasibility::Both,
                (true, false) => Feasibility::Down,
                (false, true) => Feasibility::Up,
                (false, false) => node_witness(curves, k, level, budget)
                    .map_or(Feasibility::Inconclusive, Feasibility::Obstructed),
            }
        })
        .collect()
}

fn node_witness(curves: &EigCurves, k: usize, level: f64, budget: f64) -> Option<ObstructionCert> {
    let mut lo = (0, f64::INFINITY);
    let mut hi = (0, f64::NEG_INFINITY);
    for (j, v) in curves.curve(k).enumerate() {
        if v < lo.1 {
            lo = (j, v);
        }
        if v > hi.1 {
            hi = (j, v);
        }
    }
    if lo.1 <= level - budget && hi.1 >= level + budget {
        let m = curves.m() as f64;
        Some(ObstructionCert {
            level,
            budget,
            curve: k,
            below: Witness {
                node: lo.0,
                s: lo.0 as f64 / m,
                value: lo.1,
            },
            above: Witness {
                node: hi.0,
                s: hi.0 as f64 / m,
                value: hi.1,
            },
        })
    } else {
        None
    }
}
