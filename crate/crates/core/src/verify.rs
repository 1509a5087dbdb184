//! Independent re-derivation of every certified quantity in a report from
//! the input element and the stored paths.
//!
//! Recorded values are compared against fresh recomputation, so any edit to
//! a certified field shows up as a named failed check. The final error
//! inequalities are evaluated on `x`, `y^n` and `b` directly.

use serde::Serialize;

use crate::eig::{eig_curves_with, EigCurves};
use crate::error::{FsaError, Result};
use crate::path::MatPath;
use crate::pipeline::{
    budget_schedule, current_gaps, make_partition, spectral_clusters, CLUSTER_TOL, STRICT_GUARD,
};
use crate::calculus::spectral_projection_with;
use crate::report::{ApproximantReport, LevelRecord, ObstructionReport, Report, REPORT_SCHEMA};
use crate::spectrum::level_gap;
use crate::surgery::plan_surgery;

/// Relative tolerance for recorded-versus-recomputed agreement.
pub const MATCH_TOL: f64 = 1e-9;
/// Entry-wise tolerance when recomputing the approximant.
pub const APPROXIMANT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Verdict {
    pub checks: Vec<Check>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.ok)
    }

    fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            ok,
            detail: detail.into(),
        });
    }

    /// `recorded` agrees with `recomputed` to [`MATCH_TOL`].
    fn matches(&mut self, name: impl Into<String>, recorded: f64, recomputed: f64) {
        let ok = close(recorded, recomputed);
        self.check(name, ok, format!("recorded {recorded:e}, recomputed {recomputed:e}"));
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= MATCH_TOL * (1e-3 + a.abs().max(b.abs()))
}

pub fn verify_report(x: &MatPath, report: &Report) -> Result<Verdict> {
    let found = x.digest();
    if report.input_digest() != found {
        return Err(FsaError::DigestMismatch {
            expected: report.input_digest().to_string(),
            found,
        });
    }
    match report {
        Report::Approximant(r) => verify_approximant(x, r),
        Report::Obstruction(r) => verify_obstruction(x, r),
    }
}

fn check_header(v: &mut Verdict, schema: &str, eps: f64, partition: &[f64], mesh: f64) {
    v.check("schema", schema == REPORT_SCHEMA, format!("schema {schema:?}"));
    v.check(
        "epsilon in (0, 2)",
        eps.is_finite() && eps > 0.0 && eps < 2.0,
        format!("epsilon {eps}"),
    );
    match make_partition(eps) {
        Ok(p) => {
            v.check(
                "partition size matches epsilon",
                p.levels.len() == partition.len(),
                format!("recorded {}, recomputed {}", partition.len(), p.levels.len()),
            );
            for (i, (a, b)) in partition.iter().zip(&p.levels).enumerate() {
                v.matches(format!("partition[{i}]"), *a, *b);
            }
            v.matches("mesh", mesh, p.mesh);
        }
        Err(e) => v.check("partition", false, e.to_string()),
    }
    v.check(
        "mesh < epsilon/2",
        mesh < eps / 2.0,
        format!("mesh {mesh}, epsilon {eps}"),
    );
}

/// Replays the level sequence; returns the element and curves after the
/// last record.
fn replay_levels(
    v: &mut Verdict,
    x: &MatPath,
    eps: f64,
    partition: &[f64],
    records: &[LevelRecord],
    eig_tol: f64,
) -> Result<(MatPath, EigCurves)> {
    let mut y = x.clone();
    let mut curves = eig_curves_with(&y, eig_tol)?;
    for (i, rec) in records.iter().enumerate() {
        let tag = format!("levels[{i}]");
        v.check(
            format!("{tag}.index"),
            rec.index == i + 1,
            format!("index {}", rec.index),
        );
        if let Some(&t) = partition.get(i) {
            v.matches(format!("{tag}.level"), rec.level, t);
        } else {
            v.check(format!("{tag}.level"), false, "more levels than partition points");
        }
        let (gaps, prior) = prior_gaps(v, &tag, &curves, &partition[..i.min(partition.len())]);
        match (rec.prior_gap_min, prior) {
            (Some(a), Some(b)) => v.matches(format!("{tag}.prior_gap_min"), a, b),
            (None, None) => {}
            (a, b) => v.check(
                format!("{tag}.prior_gap_min"),
                false,
                format!("recorded {a:?}, recomputed {b:?}"),
            ),
        }
        let budget = budget_schedule(eps, i + 1, &gaps);
        v.matches(format!("{tag}.budget"), rec.budget, budget);
        v.check(
            format!("{tag}.budget <= epsilon/2^(i+1)"),
            rec.budget <= eps / 2f64.powi(i as i32 + 2) * (1.0 + MATCH_TOL),
            format!("budget {}", rec.budget),
        );

        match plan_surgery(&curves, rec.level, rec.budget) {
            Ok(plan) => {
                v.check(
                    format!("{tag}.threshold"),
                    plan.threshold == rec.threshold,
                    format!("recorded {}, recomputed {}", rec.threshold, plan.threshold),
                );
                v.matches(format!("{tag}.eta"), rec.eta, plan.eta);
            }
            Err(e) => v.check(format!("{tag}.eta"), false, format!("no surgery plan: {e}")),
        }

        let next = rec.path.clone().unwrap_or_else(|| y.clone());
        let excursion = match &rec.path {
            Some(p) => p.sub(&y).map(|d| d.sup_norm().value).unwrap_or(f64::INFINITY),
            None => 0.0,
        };
        v.matches(format!("{tag}.excursion"), rec.excursion, excursion);
        v.check(
            format!("{tag}.excursion < {tag}.budget"),
            excursion < rec.budget,
            format!("excursion {excursion}, budget {}", rec.budget),
        );
        if rec.path.is_some() {
            curves = eig_curves_with(&next, eig_tol)?;
        }
        y = next;
        let radius = level_gap(&curves, rec.level).radius();
        v.matches(format!("{tag}.gap_radius"), rec.gap_radius, radius);
        v.check(
            format!("{tag}.gap_radius > 0"),
            radius > 0.0,
            format!("recomputed radius {radius}"),
        );
    }
    Ok((y, curves))
}

fn prior_gaps(
    v: &mut Verdict,
    tag: &str,
    curves: &EigCurves,
    levels: &[f64],
) -> (Vec<f64>, Option<f64>) {
    match current_gaps(curves, levels) {
        Ok(g) => {
            let min = g.iter().copied().reduce(f64::min);
            (g, min)
        }
        Err(lost) => {
            v.check(
                format!("{tag}.prior_gap_min"),
                false,
                format!("level {} has no gap", lost + 1),
            );
            (vec![0.0], Some(0.0))
        }
    }
}

fn verify_approximant(x: &MatPath, r: &ApproximantReport) -> Result<Verdict> {
    let mut v = Verdict::default();
    let eps = r.epsilon;
    check_header(&mut v, &r.schema, eps, &r.partition, r.mesh);
    v.check(
        "levels count",
        r.levels.len() == r.partition.len(),
        format!("{} records for {} levels", r.levels.len(), r.partition.len()),
    );
    v.check(
        "approximant shape",
        r.approximant.n() == x.n() && r.approximant.m() == x.m(),
        format!("n={}, m={}", r.approximant.n(), r.approximant.m()),
    );
    if !v.passed() {
        return Ok(v);
    }

    let (y, curves) = replay_levels(&mut v, x, eps, &r.partition, &r.levels, r.config.eig_tol)?;

    let budget_sum: f64 = r.levels.iter().map(|l| l.budget).sum();
    v.matches("budget_sum", r.budget_sum, budget_sum);
    v.check(
        "budget_sum < epsilon/2",
        r.budget_sum < eps / 2.0,
        format!("sum {}, epsilon {eps}", r.budget_sum),
    );

    let mut min_gap = f64::INFINITY;
    v.check(
        "final_gaps count",
        r.final_gaps.len() == r.partition.len(),
        format!("{}", r.final_gaps.len()),
    );
    for (i, (&t, &g)) in r.partition.iter().zip(&r.final_gaps).enumerate() {
        let radius = level_gap(&curves, t).radius();
        v.matches(format!("final_gaps[{i}]"), g, radius);
        v.check(
            format!("final_gaps[{i}] > 0"),
            radius > 0.0,
            format!("recomputed radius {radius}"),
        );
        min_gap = min_gap.min(radius);
    }

    let d = (eps / 4.0 * (1.0 - STRICT_GUARD)).min(min_gap / 2.0);
    v.matches("d", r.d, d);
    v.check(
        "0 < d < epsilon/4",
        r.d > 0.0 && r.d < eps / 4.0,
        format!("d {}", r.d),
    );
    v.check(
        "d <= final_gaps/2",
        r.d <= min_gap / 2.0 * (1.0 + MATCH_TOL),
        format!("d {}, min gap {min_gap}", r.d),
    );

    v.check(
        "intervals count",
        r.intervals.len() + 1 == r.partition.len(),
        format!("{}", r.intervals.len()),
    );
    for (i, (iv, w)) in r.intervals.iter().zip(r.partition.windows(2)).enumerate() {
        v.matches(format!("intervals[{i}].lo"), iv.lo, w[0] + r.d / 2.0);
        v.matches(format!("intervals[{i}].hi"), iv.hi, w[1] - r.d / 2.0);
        v.check(
            format!("intervals[{i}] ordered"),
            iv.lo < iv.hi,
            format!("[{}, {}]", iv.lo, iv.hi),
        );
    }
    if !v.passed() {
        return Ok(v);
    }

    // b = Σ t_i χ_{F_i}(y^n), rebuilt from the recorded intervals.
    let mut rebuilt = MatPath::zero(x.n(), x.m())?;
    let mut projections_ok = true;
    for (iv, &t) in r.intervals.iter().zip(&r.partition) {
        match spectral_projection_with(&y, &curves, *iv) {
            Ok(p) => rebuilt = rebuilt.add(&p.path.scalar_mul(t))?,
            Err(e) => {
                projections_ok = false;
                v.check(
                    format!("intervals [{}, {}] avoid the spectrum", iv.lo, iv.hi),
                    false,
                    e.to_string(),
                );
            }
        }
    }
    if projections_ok {
        let diff = rebuilt.max_entry_diff(&r.approximant)?;
        v.check(
            "approximant",
            diff <= APPROXIMANT_TOL,
            format!("max entry difference {diff:e}"),
        );
    }

    let b = &r.approximant;
    let sup_xy = x.sub(&y)?.sup_norm().value;
    let sup_yb = y.sub(b)?.sup_norm().value;
    let sup_xb = x.sub(b)?.sup_norm().value;
    let chain = &r.error_chain;
    v.matches("error_chain.perturbation", chain.perturbation, budget_sum);
    v.check(
        "||x - y^n|| < error_chain.perturbation",
        sup_xy < chain.perturbation,
        format!("{sup_xy} vs {}", chain.perturbation),
    );
    v.check(
        "error_chain.perturbation < epsilon/2",
        chain.perturbation < eps / 2.0,
        format!("{}", chain.perturbation),
    );
    v.matches("error_chain.rounding", chain.rounding, r.mesh - r.d / 2.0);
    v.check(
        "||y^n - b|| <= error_chain.rounding",
        sup_yb <= chain.rounding,
        format!("{sup_yb} vs {}", chain.rounding),
    );
    v.check(
        "error_chain.rounding < epsilon/2",
        chain.rounding < eps / 2.0,
        format!("{}", chain.rounding),
    );
    v.matches(
        "error_chain.total",
        chain.total,
        chain.perturbation + chain.rounding,
    );
    v.check(
        "error_chain.total < epsilon",
        chain.total < eps,
        format!("{} vs {eps}", chain.total),
    );
    v.check(
        "||x - b|| < epsilon",
        sup_xb < eps,
        format!("{sup_xb} vs {eps}"),
    );

    let clusters = spectral_clusters(b, CLUSTER_TOL)?;
    v.check(
        "spectrum_size",
        clusters.len() == r.spectrum_size,
        format!("recorded {}, recomputed {}", r.spectrum_size, clusters.len()),
    );
    v.check(
        "spectrum_size <= partition size",
        clusters.len() <= r.partition.len(),
        format!("{} clusters", clusters.len()),
    );
    let stray: Vec<f64> = clusters
        .iter()
        .copied()
        .filter(|c| !r.partition.iter().any(|t| (t - c).abs() <= CLUSTER_TOL))
        .collect();
    v.check(
        "spectrum within partition",
        stray.is_empty(),
        format!("values off the partition: {stray:?}"),
    );
    Ok(v)
}

fn verify_obstruction(x: &MatPath, r: &ObstructionReport) -> Result<Verdict> {
    let mut v = Verdict::default();
    let eps = r.epsilon;
    check_header(&mut v, &r.schema, eps, &r.partition, r.mesh);
    let o = &r.obstruction;
    v.check(
        "obstruction.level_index",
        o.level_index == r.levels.len() + 1 && o.level_index <= r.partition.len(),
        format!("index {} after {} removed levels", o.level_index, r.levels.len()),
    );
    if !v.passed() {
        return Ok(v);
    }
    let (_, curves) = replay_levels(&mut v, x, eps, &r.partition, &r.levels, r.config.eig_tol)?;
    let i = o.level_index - 1;
    v.matches("obstruction.level", o.level, r.partition[i]);
    let (gaps, prior) = prior_gaps(&mut v, "obstruction", &curves, &r.partition[..i]);
    match (o.prior_gap_min, prior) {
        (Some(a), Some(b)) => v.matches("obstruction.prior_gap_min", a, b),
        (None, None) => {}
        (a, b) => v.check(
            "obstruction.prior_gap_min",
            false,
            format!("recorded {a:?}, recomputed {b:?}"),
        ),
    }
    v.matches("obstruction.budget", o.budget, budget_schedule(eps, o.level_index, &gaps));

    let c = &o.cert;
    v.matches("obstruction.cert.level", c.level, o.level);
    v.matches("obstruction.cert.budget", c.budget, o.budget);
    v.check(
        "obstruction.cert.curve",
        c.curve < curves.n(),
        format!("curve {} of {}", c.curve, curves.n()),
    );
    for (name, w) in [("below", &c.below), ("above", &c.above)] {
        v.check(
            format!("obstruction.cert.{name}.node"),
            w.node <= curves.m(),
            format!("node {} of {}", w.node, curves.m()),
        );
    }
    let in_range = c.curve < curves.n() && c.below.node <= curves.m() && c.above.node <= curves.m();
    if in_range {
        let lo = curves.value(c.below.node, c.curve);
        let hi = curves.value(c.above.node, c.curve);
        let m = curves.m() as f64;
        v.check(
            "obstruction.cert.curve",
            close(c.below.value, lo) && close(c.above.value, hi),
            format!("curve {} has values {lo} and {hi} at the witnesses", c.curve),
        );
        v.matches("obstruction.cert.below.value", c.below.value, lo);
        v.matches("obstruction.cert.above.value", c.above.value, hi);
        v.matches("obstruction.cert.below.s", c.below.s, c.below.node as f64 / m);
        v.matches("obstruction.cert.above.s", c.above.s, c.above.node as f64 / m);
        for (name, w) in [("below", &c.below), ("above", &c.above)] {
            v.check(
                format!("obstruction.cert.{name}.node"),
                close(w.value, curves.value(w.node, c.curve)) && close(w.s, w.node as f64 / m),
                format!("node {} has value {}", w.node, curves.value(w.node, c.curve)),
            );
        }
        v.check(
            "lambda(below) <= level - budget",
            lo <= o.level - o.budget,
            format!("{lo} vs {}", o.level - o.budget),
        );
        v.check(
            "lambda(above) >= level + budget",
            hi >= o.level + o.budget,
            format!("{hi} vs {}", o.level + o.budget),
        );
    }
    Ok(v)
}
