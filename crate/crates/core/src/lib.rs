//! Finite-spectrum approximation of self-adjoint elements of `C([0,1], Mₙ(ℂ))`.
//!
//! Elements are piecewise-linear paths of Hermitian matrices on a uniform
//! grid. [`finite_spectrum_approximate`] either returns an approximant with
//! finitely many spectral values and a certified error bound, or a witness
//! that some level cannot be cleared within its budget.

pub mod calculus;
pub mod eig;
pub mod error;
pub mod instances;
pub mod matrix;
pub mod path;
pub mod pipeline;
pub mod report;
pub mod spectrum;
pub mod surgery;
pub mod verify;

pub use calculus::{
    apply_fn, resolution_check, spectral_projection, PieceValue, PiecewiseFn, Projection,
    ResolutionReport,
};
pub use eig::{
    eig_curves, eig_curves_with, eig_hermitian, eig_hermitian_with, operator_norm, EigCurves,
    HermitianEig, Interval, DEFAULT_EIG_TOL,
};
pub use error::{FsaError, Result};
pub use instances::{random_hermitian_seeded, random_trig_path, InstanceSpec};
pub use matrix::CMat;
pub use num_complex::Complex64;
pub use path::{CertifiedBound, ElementFile, MatPath};
pub use pipeline::{
    budget_schedule, finite_spectrum_approximate, make_partition, spectral_clusters, Partition,
    PipelineConfig, CLUSTER_TOL,
};
pub use report::{ApproximantReport, LevelRecord, ObstructionReport, Report, REPORT_SCHEMA};
pub use spectrum::{
    check_removability, level_gap, spectrum_bands, Feasibility, GapCert, LevelStatus,
    ObstructionCert, SpectrumReport, Witness, DEFAULT_MERGE_TOL,
};
pub use surgery::{
    clip_curves, plan_surgery, reassemble, remove_level, remove_level_with, Direction, LevelRemoval,
    SurgeryPlan,
};
pub use verify::{verify_report, Check, Verdict};
