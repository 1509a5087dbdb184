use thiserror::Error;

use crate::report::ObstructionReport;
use crate::spectrum::ObstructionCert;

pub type Result<T, E = FsaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FsaError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("a path needs at least one segment (m >= 1)")]
    NoSegments,
    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("epsilon must be finite and positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("budget must be finite and positive, got {0}")]
    InvalidBudget(f64),
    #[error("sup-norm {norm} is not below 1")]
    NormTooLarge { norm: f64 },

    #[error("discontinuity at {point} touches the spectrum enclosure of curve {curve} on segment {segment}")]
    DomainViolation {
        point: f64,
        curve: usize,
        segment: usize,
    },

    #[error("level {} cannot be removed within budget {}: curve {} is pinned on both sides", .0.level, .0.budget, .0.curve)]
    LevelObstructed(ObstructionCert),
    #[error("inconclusive at level {level}, budget {budget}: curve {curve} is neither feasible nor witnessed obstructed; refine the grid")]
    InconclusiveGrid {
        level: f64,
        budget: f64,
        curve: usize,
    },
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error("obstructed at level index {}", .0.obstruction.level_index)]
    Obstructed(Box<ObstructionReport>),

    #[error("input digest mismatch: report has {expected}, element hashes to {found}")]
    DigestMismatch { expected: String, found: String },
    #[error("unknown instance {0:?}")]
    UnknownInstance(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
