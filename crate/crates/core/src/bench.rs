//! Greedy-versus-exact benchmark over a suite of benefit-maximizing instances.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bmgop::{approx_bound, bmgop_compute, solve_bmgop_exact, BmgopError, BmgopInstance, ConditionMode};
use crate::limits::Limits;
use crate::num::fmt_num;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub id: String,
    pub exact_benefit: f64,
    pub greedy_benefit: f64,
    /// `greedy / exact`; absent when the optimum is 0.
    pub ratio: Option<f64>,
    pub bound: f64,
    pub bound_applicable: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTiming {
    pub id: String,
    pub exact_seconds: f64,
    pub greedy_seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    /// Wall-clock figures, kept apart so the records stay reproducible.
    pub timings: Vec<BenchTiming>,
}

impl BenchReport {
    pub fn failures(&self) -> Vec<&BenchRecord> {
        self.records.iter().filter(|r| !r.passed).collect()
    }

    pub fn min_ratio(&self) -> Option<f64> {
        self.records.iter().filter_map(|r| r.ratio).min_by(f64::total_cmp)
    }

    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<24} {:>10} {:>10} {:>8} {:>8} {:>7} {:>4}\n",
            "instance", "exact", "greedy", "ratio", "bound", "applies", "ok"
        );
        for r in &self.records {
            out += &format!(
                "{:<24} {:>10} {:>10} {:>8} {:>8} {:>7} {:>4}\n",
                r.id,
                fmt_num(r.exact_benefit),
                fmt_num(r.greedy_benefit),
                r.ratio.map_or("-".into(), |x| format!("{x:.4}")),
                format!("{:.4}", r.bound),
                if r.bound_applicable { "yes" } else { "no" },
                if r.passed { "yes" } else { "NO" },
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("exact search on `{id}` hit its limit; {} instance(s) finished", partial.records.len())]
    LimitReached { id: String, partial: BenchReport },
    #[error("greedy fell below the guaranteed ratio on {}", failed.join(", "))]
    BoundViolated { failed: Vec<String>, report: BenchReport },
    #[error("instance `{id}`: {source}")]
    Solver { id: String, source: BmgopError },
}

/// Runs the exact search and the greedy on every instance, in id order.
/// The bound is only enforced where its precondition holds.
pub fn run_bench(
    suite: &[(String, BmgopInstance)],
    delta: f64,
    mode: ConditionMode,
    limits: Limits,
) -> Result<BenchReport, BenchError> {
    let mut order: Vec<&(String, BmgopInstance)> = suite.iter().collect();
    order.sort_by(|a, b| a.0.cmp(&b.0));
    let mut report = BenchReport::default();
    for (id, inst) in order {
        let solver = |source| BenchError::Solver { id: id.clone(), source };
        let t0 = Instant::now();
        let exact = match solve_bmgop_exact(inst, limits) {
            Ok(s) => s,
            Err(BmgopError::LimitReached { .. }) => {
                return Err(BenchError::LimitReached {
                    id: id.clone(),
                    partial: report,
                })
            }
            Err(e) => return Err(solver(e)),
        };
        let t1 = Instant::now();
        let (greedy, _) = bmgop_compute(inst, delta, mode).map_err(solver)?;
        let t2 = Instant::now();
        let bound = approx_bound(inst, delta).map_err(solver)?;
        let ratio = (exact.achieved_benefit > 0.0).then(|| greedy.achieved_benefit / exact.achieved_benefit);
        let passed = !bound.applicable || ratio.is_none_or(|r| r >= bound.value - EPS);
        report.records.push(BenchRecord {
            id: id.clone(),
            exact_benefit: exact.achieved_benefit,
            greedy_benefit: greedy.achieved_benefit,
            ratio,
            bound: bound.value,
            bound_applicable: bound.applicable,
            passed,
        });
        report.timings.push(BenchTiming {
            id: id.clone(),
            exact_seconds: (t1 - t0).as_secs_f64(),
            greedy_seconds: (t2 - t1).as_secs_f64(),
        });
    }
    let failed: Vec<String> = report.failures().iter().map(|r| r.id.clone()).collect();
    if failed.is_empty() {
        Ok(report)
    } else {
        Err(BenchError::BoundViolated { failed, report })
    }
}
