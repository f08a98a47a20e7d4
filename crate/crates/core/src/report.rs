//! Solution reports and the line-oriented greedy trace.

use serde::{Deserialize, Serialize};

use crate::bmgop::{validate_bmgop, BmgopSolution, Fixup, GreedyTrace, StopReason};
use crate::domain::{ActionPoint, Domain};
use crate::gbgop::{validate_gbgop, GbgopSolution};
use crate::io::Instance;
use crate::map::Point;
use crate::num::fmt_num;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    Optimal,
    Approximate,
    /// A limit stopped the search; the pairs are the best found so far.
    LimitReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionReport {
    pub problem: String,
    pub method: String,
    pub status: ReportStatus,
    pub pairs: Vec<(String, (u32, u32))>,
    pub cost: f64,
    pub cardinality: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benefit: Option<f64>,
    pub proven_optimal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reported_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    #[serde(default)]
    pub diagnostics: Vec<String>,
}

fn pair_docs(domain: &Domain, pairs: &[ActionPoint]) -> Vec<(String, (u32, u32))> {
    pairs
        .iter()
        .map(|p| (domain.actions[p.action.0].name.clone(), (p.point.x, p.point.y)))
        .collect()
}

impl SolutionReport {
    pub fn from_gbgop(domain: &Domain, sol: &GbgopSolution, method: &str, status: ReportStatus) -> Self {
        SolutionReport {
            problem: "gbgop".into(),
            method: method.into(),
            status,
            pairs: pair_docs(domain, &sol.pairs),
            cost: sol.total_cost,
            cardinality: sol.cardinality,
            benefit: None,
            proven_optimal: status == ReportStatus::Optimal,
            reported_bound: None,
            trace: None,
            diagnostics: Vec::new(),
        }
    }

    pub fn from_bmgop(domain: &Domain, sol: &BmgopSolution, method: &str, status: ReportStatus) -> Self {
        SolutionReport {
            problem: "bmgop".into(),
            method: method.into(),
            status,
            pairs: pair_docs(domain, &sol.pairs),
            cost: sol.total_cost,
            cardinality: sol.cardinality,
            benefit: Some(sol.achieved_benefit),
            proven_optimal: status == ReportStatus::Optimal,
            reported_bound: sol.reported_bound,
            trace: None,
            diagnostics: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        crate::io::to_canonical_json(self)
    }

    pub fn to_text(&self, domain: &Domain) -> String {
        let status = match self.status {
            ReportStatus::Optimal => "optimal",
            ReportStatus::Approximate => "approximate",
            ReportStatus::LimitReached => "limit reached (best found so far)",
        };
        let mut out = format!("{} via {}: {status}\n", self.problem, self.method);
        let names: Vec<String> = self
            .pairs
            .iter()
            .map(|(a, (x, y))| domain.pair_name(ActionPoint::new(domain.action_id(a).unwrap(), Point::new(*x, *y))))
            .collect();
        out += &format!("pairs ({}): {}\n", self.cardinality, if names.is_empty() { "none".into() } else { names.join(" ") });
        out += &format!("cost: {}\n", fmt_num(self.cost));
        if let Some(b) = self.benefit {
            out += &format!("benefit: {}\n", fmt_num(b));
        }
        if let Some(b) = self.reported_bound {
            out += &format!("guaranteed ratio: {}\n", fmt_num(b));
        }
        if let Some(t) = &self.trace {
            out += &format!("trace: {t}\n");
        }
        for d in &self.diagnostics {
            out += &format!("note: {d}\n");
        }
        out
    }
}

/// Resolves the report's pairs against `inst` and checks that they form a
/// solution with the stated cost, cardinality and benefit.
pub fn revalidate(report: &SolutionReport, inst: &Instance) -> Result<(), String> {
    let d = inst.domain();
    if report.problem != inst.kind_name() {
        return Err(format!("report is for {}, instance is {}", report.problem, inst.kind_name()));
    }
    let mut pairs = Vec::new();
    for (name, (x, y)) in &report.pairs {
        let action = d.action_id(name).ok_or_else(|| format!("unknown action `{name}`"))?;
        let point = Point::new(*x, *y);
        if !d.map.contains(point) {
            return Err(format!("point {point} is outside the map"));
        }
        pairs.push(ActionPoint::new(action, point));
    }
    let cost: f64 = pairs.iter().map(|&p| d.cost_of(p)).sum();
    if (cost - report.cost).abs() > EPS {
        return Err(format!("stated cost {} but pairs cost {}", fmt_num(report.cost), fmt_num(cost)));
    }
    if pairs.len() != report.cardinality {
        return Err(format!("stated cardinality {} but {} pairs listed", report.cardinality, pairs.len()));
    }
    match inst {
        Instance::Gbgop(g) => {
            let v = validate_gbgop(g, &pairs);
            if !v.is_valid() {
                return Err(format!("not a solution: {:?}", v.violations));
            }
        }
        Instance::Bmgop(b) => {
            let v = validate_bmgop(b, &pairs);
            if !v.is_empty() {
                return Err(format!("not a solution: {v:?}"));
            }
            let f = crate::bmgop::objective_f(b, &pairs);
            if report.benefit.is_none_or(|s| (s - f).abs() > EPS) {
                return Err(format!("stated benefit {:?} but pairs give {}", report.benefit, fmt_num(f)));
            }
        }
    }
    Ok(())
}

/// Header line, one line per iteration, then the repair line.
pub fn trace_text(domain: &Domain, trace: &GreedyTrace) -> String {
    let mut out = format!(
        "delta={} lambda={} ic_s0={} mode={} cond={}\n",
        fmt_num(trace.delta),
        fmt_num(trace.lambda),
        trace.active_ics,
        trace.mode,
        fmt_num(trace.initial_condition)
    );
    for (i, r) in trace.iterations.iter().enumerate() {
        let ws = if r.w_ic.is_empty() {
            "-".to_string()
        } else {
            r.w_ic.iter().map(|&w| fmt_num(w)).collect::<Vec<_>>().join(",")
        };
        out += &format!(
            "iter {} chosen={} ratio={} gain={} w'={} w''={} w1..wm={} cond={}\n",
            i + 1,
            domain.pair_name(r.chosen),
            fmt_num(r.ratio),
            fmt_num(r.gain),
            fmt_num(r.w_card),
            fmt_num(r.w_cost),
            ws,
            fmt_num(r.condition),
        );
    }
    let stop = match trace.stop {
        StopReason::ConditionExceeded => "condition_exceeded",
        StopReason::AllPairsChosen => "all_pairs_chosen",
        StopReason::NoPositiveGain => "no_positive_gain",
    };
    let fixup = match trace.fixup {
        Fixup::NotNeeded => "not_needed",
        Fixup::DroppedLast => "dropped_last",
        Fixup::KeptLast => "kept_last",
    };
    let removed = if trace.fallback_removed.is_empty() {
        "none".to_string()
    } else {
        trace.fallback_removed.iter().map(|&p| domain.pair_name(p)).collect::<Vec<_>>().join(",")
    };
    out += &format!("fixup stop={stop} result={fixup} fallback_removed={removed}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bmgop::{bmgop_compute, ConditionMode};
    use crate::gbgop::solve_gbgop_exact;
    use crate::generate::{gen_campaign, CampaignParams};
    use crate::limits::Limits;

    #[test]
    fn campaign_trace_lines() {
        let c = gen_campaign(CampaignParams::default());
        let (_, trace) = bmgop_compute(&c.bmgop, 0.001, ConditionMode::Weighted).unwrap();
        let text = trace_text(&c.bmgop.domain, &trace);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("delta=0.001 lambda=22.1450122084 ic_s0=1 mode=weighted"));
        assert!(lines[1].starts_with("iter 1 chosen=appeal1@(4,3) "));
        assert_eq!(lines.len(), 2 + trace.iterations.len());
        assert!(lines.last().unwrap().starts_with("fixup stop=condition_exceeded"));
    }

    #[test]
    fn reports_revalidate() {
        let c = gen_campaign(CampaignParams::default());
        let (sol, _) = bmgop_compute(&c.bmgop, 0.001, ConditionMode::Plain).unwrap();
        let report = SolutionReport::from_bmgop(&c.bmgop.domain, &sol, "approx", ReportStatus::Approximate);
        let inst = Instance::Bmgop(c.bmgop.clone());
        revalidate(&report, &inst).unwrap();
        let back: SolutionReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back.to_json(), report.to_json());

        let mut tampered = report.clone();
        tampered.benefit = Some(46.0);
        assert!(revalidate(&tampered, &inst).is_err());

        let g = solve_gbgop_exact(&c.gbgop, Limits::default()).unwrap();
        let report = SolutionReport::from_gbgop(&c.gbgop.domain, &g, "exact", ReportStatus::Optimal);
        revalidate(&report, &Instance::Gbgop(c.gbgop)).unwrap();
    }
}
