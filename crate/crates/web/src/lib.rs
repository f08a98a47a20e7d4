//! Browser bindings for the campaign scenario: run the greedy with chosen
//! parameters, plot the guaranteed ratio, and show the reduced pair set.
//! Every binding returns a JSON string; the plain functions behind them are
//! what the native tests exercise.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use gop_core::bmgop::{approx_bound_value, bmgop_compute, lambda, solve_bmgop_exact, ConditionMode};
use gop_core::gbgop::reduce_to_r_star;
use gop_core::generate::{gen_campaign, CampaignParams};
use gop_core::report::trace_text;
use gop_core::{ActionPoint, Domain, GroundAtom, Limits, PredicateId};

/// Exact search nodes allowed per request; the campaign needs far fewer.
const EXACT_NODES: u64 = 2_000_000;

#[derive(Debug, Serialize)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
    /// Predicates true in the initial state.
    pub atoms: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct MapView {
    pub width: u32,
    pub height: u32,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Serialize)]
pub struct Pick {
    pub action: String,
    pub x: u32,
    pub y: u32,
}

#[derive(Debug, Serialize)]
pub struct GreedyView {
    pub picks: Vec<Pick>,
    pub benefit: f64,
    pub cost: f64,
    pub lambda: f64,
    pub bound: f64,
    pub bound_applicable: bool,
    /// Optimum from the exact search, when it finished within its budget.
    pub optimum: Option<f64>,
    /// Points whose `exposure` atom holds after the picks.
    pub exposed: Vec<(u32, u32)>,
    pub trace: String,
}

#[derive(Debug, Serialize)]
pub struct CurvePoint {
    pub ics: usize,
    pub lambda: f64,
    pub bound: f64,
}

#[derive(Debug, Serialize)]
pub struct ReductionView {
    pub r: usize,
    pub r_star: Vec<Pick>,
}

fn pick(d: &Domain, p: ActionPoint) -> Pick {
    Pick {
        action: d.actions[p.action.0].name.clone(),
        x: p.point.x,
        y: p.point.y,
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("views serialize")
}

pub fn map_view() -> MapView {
    let d = gen_campaign(CampaignParams::default()).bmgop.domain;
    let cells = d
        .map
        .points()
        .map(|p| Cell {
            x: p.x,
            y: p.y,
            atoms: (0..d.predicates.len())
                .filter(|&i| d.initial.contains(&GroundAtom::new(PredicateId(i), p)))
                .map(|i| d.predicates[i].clone())
                .collect(),
        })
        .collect();
    MapView {
        width: d.map.width_bound() + 1,
        height: d.map.height_bound() + 1,
        cells,
    }
}

pub fn greedy_view(delta: f64, k: usize, budget: f64, mode: &str) -> Result<GreedyView, String> {
    let mode: ConditionMode = mode.parse()?;
    let mut inst = gen_campaign(CampaignParams::default()).bmgop;
    inst.k = k;
    inst.budget = budget;
    inst.validate().map_err(|e| e.to_string())?;
    let (sol, trace) = bmgop_compute(&inst, delta, mode).map_err(|e| e.to_string())?;
    let optimum = solve_bmgop_exact(&inst, Limits::nodes(EXACT_NODES)).ok().map(|s| s.achieved_benefit);
    let d = &inst.domain;
    let exposure = d.predicate_id("exposure").expect("campaign has exposure");
    let exposed = sol
        .final_state
        .atoms()
        .filter(|a| a.predicate == exposure)
        .map(|a| (a.point.x, a.point.y))
        .collect();
    Ok(GreedyView {
        picks: sol.pairs.iter().map(|&p| pick(d, p)).collect(),
        benefit: sol.achieved_benefit,
        cost: sol.total_cost,
        lambda: trace.lambda,
        bound: approx_bound_value(trace.active_ics, delta),
        bound_applicable: inst.bound_applies(delta),
        optimum,
        exposed,
        trace: trace_text(d, &trace),
    })
}

pub fn curve(delta: f64, max_ics: usize) -> Result<Vec<CurvePoint>, String> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(format!("delta = {delta} must lie strictly between 0 and 1"));
    }
    if max_ics > 1000 {
        return Err(format!("at most 1000 constraints, got {max_ics}"));
    }
    Ok((0..=max_ics)
        .map(|m| CurvePoint {
            ics: m,
            lambda: lambda(delta, m),
            bound: approx_bound_value(m, delta),
        })
        .collect())
}

pub fn reduction_view() -> ReductionView {
    let inst = gen_campaign(CampaignParams::default()).gbgop;
    let red = reduce_to_r_star(&inst);
    ReductionView {
        r: red.r_len(),
        r_star: red.r_star.iter().map(|&p| pick(&inst.domain, p)).collect(),
    }
}

#[wasm_bindgen]
pub fn campaign_map() -> String {
    json(&map_view())
}

#[wasm_bindgen]
pub fn campaign_greedy(delta: f64, k: u32, budget: f64, mode: &str) -> Result<String, JsError> {
    greedy_view(delta, k as usize, budget, mode).map(|v| json(&v)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn bound_curve(delta: f64, max_ics: u32) -> Result<String, JsError> {
    curve(delta, max_ics as usize).map(|v| json(&v)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn campaign_reduction() -> String {
    json(&reduction_view())
}
