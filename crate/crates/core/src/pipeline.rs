//! Finite-spectrum approximation driver.
//!
//! For a self-adjoint `x` with `||x|| < 1` and a tolerance `ε`:
//!
//! 1. partition `[-1, 1]` uniformly with mesh `< ε/2`;
//! 2. remove each level `t_i` in turn with budget `ε_i`, producing
//!    `y^1, …, y^n` with certified gaps at every level;
//! 3. pick `d < ε/4` inside all final gaps, set
//!    `F_i = [t_i + d/2, t_{i+1} - d/2]`, `p_i = χ_{F_i}(y^n)`;
//! 4. return `b = Σ t_i p_i` with the chain
//!    `||x - b|| ≤ Σ ε_i + (mesh - d/2) < ε/2 + ε/2`.

use crate::calculus::{resolution_check, spectral_projection_with};
use crate::eig::{eig_curves_with, EigCurves, Interval, DEFAULT_EIG_TOL};
use crate::error::{FsaError, Result};
use crate::path::MatPath;
use crate::report::{
    ApproximantReport, Diagnostics, ErrorChain, LevelRecord, ObstructedLevel, ObstructionReport,
    ReportConfig, REPORT_SCHEMA,
};
use crate::spectrum::{level_gap, spectrum_bands, LevelStatus, DEFAULT_MERGE_TOL};
use crate::surgery::remove_level_with;

/// Multiplicative guard keeping `d` strictly below `ε/4` after rounding.
pub const STRICT_GUARD: f64 = 1e-6;
/// Eigenvalues of `b` closer than this count as one spectral value.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Bound on the projection-family defects accepted for a certificate.
pub const RESOLUTION_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineConfig {
    pub eig_tol: f64,
    pub merge_tol: f64,
    /// Embed the projections `p_i` in the report.
    pub keep_projections: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            eig_tol: DEFAULT_EIG_TOL,
            merge_tol: DEFAULT_MERGE_TOL,
            keep_projections: true,
        }
    }
}

/// `-1 = t_1 < … < t_n = 1`, uniform.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub levels: Vec<f64>,
    pub mesh: f64,
}

/// Uniform partition of `[-1, 1]` with the fewest points such that the mesh
/// `2/(n-1)` is below `ε/2`.
pub fn make_partition(eps: f64) -> Result<Partition> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(FsaError::InvalidEpsilon(eps));
    }
    let mut n: usize = 2;
    while 2.0 / ((n - 1) as f64) >= eps / 2.0 {
        n += 1;
    }
    let mesh = 2.0 / (n - 1) as f64;
    let mut levels: Vec<f64> = (0..n).map(|i| -1.0 + i as f64 * mesh).collect();
    levels[0] = -1.0;
    levels[n - 1] = 1.0;
    Ok(Partition { levels, mesh })
}

/// Budget for level `i` (1-based): `ε/4` for the first level, afterwards
/// `min(ε / 2^{i+1}, ½ · min current gap radius at earlier levels)`.
pub fn budget_schedule(eps: f64, i: usize, current_gaps: &[f64]) -> f64 {
    assert!(i >= 1, "levels are numbered from 1");
    let geometric = eps / 2f64.powi(i as i32 + 1);
    if i == 1 {
        return geometric;
    }
    current_gaps
        .iter()
        .map(|g| g / 2.0)
        .fold(geometric, f64::min)
}

/// Current gap radii at `levels`, or the first level that lost its gap.
pub(crate) fn current_gaps(curves: &EigCurves, levels: &[f64]) -> std::result::Result<Vec<f64>, usize> {
    levels
        .iter()
        .enumerate()
        .map(|(i, &t)| match level_gap(curves, t) {
            LevelStatus::Gap(g) => Ok(g.radius),
            LevelStatus::Hit(_) => Err(i),
        })
        .collect()
}

/// Number of distinct eigenvalue clusters across all nodes, with their
/// representative values.
pub fn spectral_clusters(b: &MatPath, tol: f64) -> Result<Vec<f64>> {
    let curves = b.curves()?;
    let mut values: Vec<f64> = (0..=b.m())
        .flat_map(|j| curves.node_values(j).to_vec())
        .collect();
    values.sort_by(f64::total_cmp);
    let mut reps: Vec<f64> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for v in values {
        if v - last > tol {
            reps.push(v);
        }
        last = v;
    }
    Ok(reps)
}

pub fn finite_spectrum_approximate(
    x: &MatPath,
    eps: f64,
    cfg: &PipelineConfig,
) -> Result<ApproximantReport> {
    if !(eps.is_finite() && eps > 0.0 && eps < 2.0) {
        return Err(FsaError::InvalidEpsilon(eps));
    }
    let norm = x.sup_norm().value;
    if norm.is_nan() || norm >= 1.0 {
        return Err(FsaError::NormTooLarge { norm });
    }
    let partition = make_partition(eps)?;
    let levels = &partition.levels;
    let config = ReportConfig {
        eig_tol: cfg.eig_tol,
        merge_tol: cfg.merge_tol,
    };

    let mut y = x.clone();
    let mut curves = eig_curves_with(&y, cfg.eig_tol)?;
    let mut records: Vec<LevelRecord> = Vec::with_capacity(levels.len());
    let mut last_gaps: Vec<f64> = Vec::new();

    for (i, &t) in levels.iter().enumerate() {
        let gaps = current_gaps(&curves, &levels[..i]).map_err(|lost| {
            FsaError::CertificationFailed(format!(
                "level {} lost its gap while removing level {}",
                lost + 1,
                i + 1
            ))
        })?;
        // Budgets at earlier levels were at most half their gap radius, so the
        // true gaps shrink by less than half; enclosure-certified radii must
        // show the same before the construction continues.
        if let Some(j) = gaps
            .iter()
            .zip(&last_gaps)
            .position(|(now, before)| *now < before / 2.0)
        {
            return Err(FsaError::CertificationFailed(format!(
                "gap at level {} shrank from {} to {}",
                j + 1,
                last_gaps[j],
                gaps[j]
            )));
        }
        let prior_gap_min = gaps.iter().copied().reduce(f64::min);
        let budget = budget_schedule(eps, i + 1, &gaps);

        let removal = match remove_level_with(&y, &curves, t, budget, cfg.eig_tol) {
            Ok(r) => r,
            Err(FsaError::LevelObstructed(cert)) => {
                return Err(FsaError::Obstructed(Box::new(ObstructionReport {
                    schema: REPORT_SCHEMA.into(),
                    input_digest: x.digest(),
                    config,
                    epsilon: eps,
                    partition: levels.clone(),
                    mesh: partition.mesh,
                    levels: records,
                    obstruction: ObstructedLevel {
                        level_index: i + 1,
                        level: t,
                        prior_gap_min,
                        budget,
                        cert,
                    },
                })))
            }
            Err(e) => return Err(e),
        };
        log::debug!(
            "level {}/{} t={t:.6} budget={budget:.3e} eta={:.3e} gap={:.3e} changed={}",
            i + 1,
            levels.len(),
            removal.plan.eta,
            removal.gap.radius,
            removal.changed
        );
        records.push(LevelRecord {
            index: i + 1,
            level: t,
            prior_gap_min,
            budget,
            threshold: removal.plan.threshold,
            eta: removal.plan.eta,
            excursion: removal.perturbation,
            gap_radius: removal.gap.radius,
            path: removal.changed.then(|| removal.y.clone()),
        });
        let mut next_gaps = gaps;
        next_gaps.push(removal.gap.radius);
        last_gaps = next_gaps;
        y = removal.y;
        curves = removal.curves;
    }

    let final_gaps = current_gaps(&curves, levels).map_err(|lost| {
        FsaError::CertificationFailed(format!("level {} lost its gap at the end", lost + 1))
    })?;
    let min_gap = final_gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let d = (eps / 4.0 * (1.0 - STRICT_GUARD)).min(min_gap / 2.0);
    let intervals: Vec<Interval> = levels
        .windows(2)
        .map(|w| Interval::new(w[0] + d / 2.0, w[1] - d / 2.0))
        .collect();

    let projections = intervals
        .iter()
        .map(|f| spectral_projection_with(&y, &curves, *f))
        .collect::<Result<Vec<_>>>()?;
    let paths: Vec<&MatPath> = projections.iter().map(|p| &p.path).collect();
    let resolution = resolution_check(&paths)?;
    if resolution.max_defect() > RESOLUTION_TOL {
        return Err(FsaError::CertificationFailed(format!(
            "projections do not resolve the identity: {resolution:?}"
        )));
    }

    let mut b = MatPath::zero(x.n(), x.m())?;
    for (p, &t) in projections.iter().zip(levels) {
        b = b.add(&p.path.scalar_mul(t))?;
    }
    let b = MatPath::new(b.n(), b.m(), b.nodes().to_vec())?;

    let budget_sum: f64 = records.iter().map(|r| r.budget).sum();
    let rounding = partition.mesh - d / 2.0;
    let error_chain = ErrorChain {
        perturbation: budget_sum,
        rounding,
        total: budget_sum + rounding,
    };
    let sup_x_minus_y = x.sub(&y)?.sup_norm().value;
    let sup_y_minus_b = y.sub(&b)?.sup_norm().value;
    let sup_x_minus_b = x.sub(&b)?.sup_norm().value;

    let checks = [
        (sup_x_minus_y < budget_sum, "||x - y^n|| < sum of budgets"),
        (budget_sum < eps / 2.0, "sum of budgets < eps/2"),
        (sup_y_minus_b <= rounding, "||y^n - b|| <= mesh - d/2"),
        (rounding < eps / 2.0, "mesh - d/2 < eps/2"),
        (error_chain.total < eps, "total error < eps"),
        (sup_x_minus_b < eps, "||x - b|| < eps"),
    ];
    if let Some((_, what)) = checks.iter().find(|(ok, _)| !ok) {
        return Err(FsaError::CertificationFailed(format!("{what} does not hold")));
    }

    let clusters = spectral_clusters(&b, CLUSTER_TOL)?;
    if clusters.len() > levels.len() {
        return Err(FsaError::CertificationFailed(format!(
            "approximant has {} spectral values, partition has {}",
            clusters.len(),
            levels.len()
        )));
    }

    let diagnostics = Diagnostics {
        sup_x_minus_y,
        sup_y_minus_b,
        sup_x_minus_b,
        resolution,
        max_projection_jump: projections.iter().map(|p| p.max_jump).fold(0.0, f64::max),
        max_continuity_ratio: projections
            .iter()
            .map(|p| p.continuity_ratio)
            .fold(0.0, f64::max),
        bands: spectrum_bands(&curves, cfg.merge_tol).bands,
    };

    Ok(ApproximantReport {
        schema: REPORT_SCHEMA.into(),
        input_digest: x.digest(),
        config,
        epsilon: eps,
        partition: levels.clone(),
        mesh: partition.mesh,
        levels: records,
        budget_sum,
        final_gaps,
        d,
        intervals,
        approximant: b,
        projections: cfg
            .keep_projections
            .then(|| projections.into_iter().map(|p| p.path).collect()),
        error_chain,
        spectrum_size: clusters.len(),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::CMat;

    #[test]
    fn partition_sizes() {
        let p = make_partition(0.5).unwrap();
        assert_eq!(p.levels.len(), 10);
        assert!((p.mesh - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!((p.levels[0], p.levels[9]), (-1.0, 1.0));

        let p = make_partition(2.0).unwrap();
        assert_eq!(p.levels.len(), 4);
        assert!((p.mesh - 2.0 / 3.0).abs() < 1e-15);

        assert!(matches!(make_partition(0.0), Err(FsaError::InvalidEpsilon(_))));
        assert!(matches!(make_partition(-1.0), Err(FsaError::InvalidEpsilon(_))));
    }

    #[test]
    fn partition_is_minimal() {
        for eps in [0.05, 0.1, 0.25, 0.3, 0.5, 0.7, 1.0, 1.5, 1.99] {
            let n = make_partition(eps).unwrap().levels.len();
            assert!(2.0 / ((n - 1) as f64) < eps / 2.0);
            assert!(2.0 / ((n - 2) as f64) >= eps / 2.0, "eps {eps}: n {n} not minimal");
        }
    }

    #[test]
    fn budget_examples() {
        assert_eq!(budget_schedule(0.4, 1, &[]), 0.1);
        assert!((budget_schedule(0.4, 2, &[0.03]) - 0.015).abs() < 1e-17);
        assert!((budget_schedule(0.4, 3, &[0.03, 0.04]) - 0.015).abs() < 1e-17);
        assert_eq!(budget_schedule(0.4, 3, &[1.0, 1.0]), 0.4 / 16.0);
    }

    #[test]
    fn constant_diagonal_succeeds() {
        let x = MatPath::constant(&CMat::diag(&[-0.4, 0.3]), 8).unwrap();
        let r = finite_spectrum_approximate(&x, 0.5, &PipelineConfig::default()).unwrap();
        assert_eq!(r.partition.len(), 10);
        assert!(r.diagnostics.sup_x_minus_b < 0.5);
        assert!(r.spectrum_size <= 2);
        assert!(r.budget_sum < 0.25);
        assert!(r.d > 0.0 && r.d < 0.125);
        // b is diagonal with entries from the partition
        for h in r.approximant.nodes() {
            for i in 0..2 {
                let v = h.get(i, i).re;
                assert!(r.partition.iter().any(|t| (t - v).abs() < 1e-12), "{v}");
            }
            assert!(h.get(0, 1).norm() < 1e-15);
        }
    }

    #[test]
    fn scalar_line_is_obstructed_at_an_interior_level() {
        let x = MatPath::from_fn(1, 64, |s| CMat::diag(&[0.99 * (2.0 * s - 1.0)])).unwrap();
        let err = finite_spectrum_approximate(&x, 0.5, &PipelineConfig::default()).unwrap_err();
        let FsaError::Obstructed(report) = err else {
            panic!("expected obstruction, got {err}");
        };
        let o = &report.obstruction;
        assert!(o.level_index > 1);
        assert!(o.level > -0.99 + o.budget && o.level < 0.99 - o.budget);
        assert!(o.budget <= 0.125);
        let path = report.obstructed_path(&x);
        assert!(o.cert.holds_on(&path.curves().unwrap()));
    }

    #[test]
    fn norm_precondition() {
        let x = MatPath::constant(&CMat::diag(&[1.2, 0.0]), 2).unwrap();
        assert!(matches!(
            finite_spectrum_approximate(&x, 0.5, &PipelineConfig::default()),
            Err(FsaError::NormTooLarge { .. })
        ));
        let x = MatPath::constant(&CMat::diag(&[0.2, 0.0]), 2).unwrap();
        assert!(matches!(
            finite_spectrum_approximate(&x, 2.0, &PipelineConfig::default()),
            Err(FsaError::InvalidEpsilon(_))
        ));
    }
}
