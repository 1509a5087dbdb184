//! JSON artifacts emitted by the pipeline and consumed by the verifier.

use serde::{Deserialize, Serialize};

use crate::calculus::ResolutionReport;
use crate::eig::Interval;
use crate::error::Result;
use crate::path::MatPath;
use crate::spectrum::ObstructionCert;

pub const REPORT_SCHEMA: &str = "fsa-report/1";

/// One removed level. `path` holds the new element when the surgery
/// changed it; otherwise the element carries over unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    /// 1-based position in the partition.
    pub index: usize,
    pub level: f64,
    /// Smallest current gap radius over earlier levels, if any.
    pub prior_gap_min: Option<f64>,
    pub budget: f64,
    pub threshold: usize,
    pub eta: f64,
    /// Certified `sup_norm(y^i - y^{i-1})`.
    pub excursion: f64,
    /// Gap radius certified at this level right after the removal.
    pub gap_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<MatPath>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorChain {
    /// `Σ budgets`, bounds `||x - y^n||`.
    pub perturbation: f64,
    /// `mesh - d/2`, bounds `||y^n - b||`.
    pub rounding: f64,
    pub total: f64,
}

/// Measured values; recomputed by the verifier but not certificates
/// themselves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub sup_x_minus_y: f64,
    pub sup_y_minus_b: f64,
    pub sup_x_minus_b: f64,
    pub resolution: ResolutionReport,
    pub max_projection_jump: f64,
    pub max_continuity_ratio: f64,
    pub bands: Vec<Interval>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub eig_tol: f64,
    pub merge_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximantReport {
    pub schema: String,
    pub input_digest: String,
    pub config: ReportConfig,
    pub epsilon: f64,
    pub partition: Vec<f64>,
    pub mesh: f64,
    pub levels: Vec<LevelRecord>,
    pub budget_sum: f64,
    /// Gap radius at each level for the final element `y^n`.
    pub final_gaps: Vec<f64>,
    pub d: f64,
    /// `F_i = [t_i + d/2, t_{i+1} - d/2]`, assigned value `t_i`.
    pub intervals: Vec<Interval>,
    pub approximant: MatPath,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projections: Option<Vec<MatPath>>,
    pub error_chain: ErrorChain,
    pub spectrum_size: usize,
    pub diagnostics: Diagnostics,
}

impl ApproximantReport {
    /// The final perturbed element `y^n`.
    pub fn final_path<'a>(&'a self, x: &'a MatPath) -> &'a MatPath {
        self.levels
            .iter()
            .rev()
            .find_map(|r| r.path.as_ref())
            .unwrap_or(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructedLevel {
    pub level_index: usize,
    pub level: f64,
    pub prior_gap_min: Option<f64>,
    pub budget: f64,
    pub cert: ObstructionCert,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub schema: String,
    pub input_digest: String,
    pub config: ReportConfig,
    pub epsilon: f64,
    pub partition: Vec<f64>,
    pub mesh: f64,
    /// Levels removed before the obstruction.
    pub levels: Vec<LevelRecord>,
    pub obstruction: ObstructedLevel,
}

impl ObstructionReport {
    /// The element on which the obstruction was found.
    pub fn obstructed_path<'a>(&'a self, x: &'a MatPath) -> &'a MatPath {
        self.levels
            .iter()
            .rev()
            .find_map(|r| r.path.as_ref())
            .unwrap_or(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Approximant(ApproximantReport),
    Obstruction(ObstructionReport),
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn input_digest(&self) -> &str {
        match self {
            Self::Approximant(r) => &r.input_digest,
            Self::Obstruction(r) => &r.input_digest,
        }
    }
}
