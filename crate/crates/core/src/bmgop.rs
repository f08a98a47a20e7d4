//! Benefit-maximizing instances: choose at most `k` pairs within budget `c`
//! and the active integrity constraints so that the total benefit of the
//! resulting state is as large as possible.
//!
//! Provides the objective, the linking integer program, an exact
//! branch-and-bound search, and the multiplicative-weights greedy with its
//! approximation bound.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ActionPoint, Domain, ModelError};
use crate::gbgop::{pair_var_name, pairs_from_assignment};
use crate::ground::Grounding;
use crate::ip::{self, IpError, IpModel, IpStatus, RowSense, Sense, VarTag};
use crate::limits::{Budget, Limits};
use crate::state::State;

const COST_EPS: f64 = 1e-9;
const TIE_EPS: f64 = 1e-9;

pub const DEFAULT_DELTA: f64 = 0.001;

#[derive(Debug, Clone, PartialEq)]
pub struct BmgopInstance {
    pub domain: Domain,
    pub k: usize,
    pub budget: f64,
}

impl BmgopInstance {
    pub fn new(domain: Domain, k: usize, budget: f64) -> Result<Self, ModelError> {
        let inst = BmgopInstance { domain, k, budget };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.domain.validate()?;
        if !(self.budget.is_finite() && self.budget >= 0.0) {
            return Err(ModelError::BadParameter {
                name: "budget",
                value: self.budget,
                reason: "must be a non-negative finite number",
            });
        }
        Ok(())
    }

    /// Whether `k, c >= 2 - delta`, the precondition of the approximation bound.
    pub fn bound_applies(&self, delta: f64) -> bool {
        let w = 2.0 - delta;
        self.k as f64 >= w && self.budget >= w
    }

    pub fn bound_warning(&self, delta: f64) -> Option<String> {
        (!self.bound_applies(delta)).then(|| {
            format!(
                "k = {} or c = {} is below 2 - delta = {}; the approximation bound is not claimed",
                self.k,
                crate::num::fmt_num(self.budget),
                crate::num::fmt_num(2.0 - delta)
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BmgopSolution {
    pub pairs: Vec<ActionPoint>,
    pub total_cost: f64,
    pub cardinality: usize,
    pub final_state: State,
    pub achieved_benefit: f64,
    pub reported_bound: Option<f64>,
}

impl BmgopSolution {
    fn from_indices(inst: &BmgopInstance, g: &Grounding, pairs: &[usize]) -> Self {
        let mut pairs = pairs.to_vec();
        pairs.sort_unstable();
        let final_state = g.appl(&pairs);
        BmgopSolution {
            pairs: pairs.iter().map(|&p| inst.domain.pair_at(p)).collect(),
            total_cost: g.total_cost(&pairs),
            cardinality: pairs.len(),
            achieved_benefit: g.state_benefit(&final_state),
            final_state,
            reported_bound: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BmgopViolation {
    Cardinality { chosen: usize, k: usize },
    CostExceeded { total: f64, budget: f64 },
    /// Indices into `Domain::ics`.
    IntegrityViolated { constraints: Vec<usize> },
}

pub fn validate_bmgop(inst: &BmgopInstance, sol: &[ActionPoint]) -> Vec<BmgopViolation> {
    let d = &inst.domain;
    let mut chosen = sol.to_vec();
    chosen.sort_unstable();
    chosen.dedup();
    let mut out = Vec::new();
    if chosen.len() > inst.k {
        out.push(BmgopViolation::Cardinality {
            chosen: chosen.len(),
            k: inst.k,
        });
    }
    let total: f64 = chosen.iter().map(|&p| d.cost_of(p)).sum();
    if total > inst.budget + COST_EPS {
        out.push(BmgopViolation::CostExceeded {
            total,
            budget: inst.budget,
        });
    }
    let ics = d.check_ics(&chosen);
    if !ics.is_satisfied() {
        out.push(BmgopViolation::IntegrityViolated {
            constraints: ics.violated,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BmgopError {
    #[error("delta = {0} must lie strictly between 0 and 1")]
    BadDelta(f64),
    #[error("the greedy needs k > 0 and c > 0 (got k = {k}, c = {budget})")]
    NonPositiveBounds { k: usize, budget: f64 },
    #[error("search limit reached before optimality was proven")]
    LimitReached { best: Option<Box<BmgopSolution>> },
    #[error(transparent)]
    Ip(#[from] IpError),
}

/// `f(S)`: total benefit of `appl(S, s0)`.
pub fn objective_f(inst: &BmgopInstance, sol: &[ActionPoint]) -> f64 {
    let s = inst.domain.appl(sol, &inst.domain.initial);
    s.atoms().map(|a| inst.domain.benefit_of(&a)).sum()
}

fn atom_var_name(domain: &Domain, index: usize) -> String {
    let atom = domain.universe().atom_at(index);
    format!("y_{}_{}_{}", domain.predicates[atom.predicate.0], atom.point.x, atom.point.y)
}

/// The linking program: one `X` per pair, one `Y` per atom outside `s0`,
/// maximize the constant `s0` benefit plus the benefit of the `Y`s made true.
pub fn build_bmgop_ip(inst: &BmgopInstance) -> IpModel {
    let d = &inst.domain;
    let g = Grounding::new(d);
    let mut model = IpModel::new(Sense::Maximize);
    model.constant = g.state_benefit(g.initial());
    let xs: Vec<usize> = (0..g.pair_count())
        .map(|p| model.add_variable(pair_var_name(d, p), Some(VarTag::Pair(p)), 0.0))
        .collect();
    let mut producers: Vec<Vec<usize>> = vec![Vec::new(); g.atom_count()];
    for (p, &x) in xs.iter().enumerate() {
        for &a in g.effects(p) {
            producers[a as usize].push(x);
        }
    }
    for a in (0..g.atom_count()).filter(|&a| !g.initial().contains_index(a)) {
        let y = model.add_variable(atom_var_name(d, a), Some(VarTag::Atom(a)), g.benefit(a));
        let name = &model.variables()[y].name;
        let label = format!("link_{}", &name[2..]);
        let terms = producers[a].iter().map(|&x| (x, 1.0)).chain([(y, -1.0)]);
        model.add_constraint(label, terms, RowSense::Ge, 0.0);
    }
    model.add_constraint("cardinality", xs.iter().map(|&x| (x, 1.0)), RowSense::Le, inst.k as f64);
    model.add_constraint(
        "budget",
        (0..g.pair_count()).map(|p| (xs[p], g.cost(p))),
        RowSense::Le,
        inst.budget,
    );
    for pos in 0..g.active_ic_count() {
        model.add_constraint(
            format!("ic_{}", g.active_ics()[pos]),
            g.ic_members(pos).iter().map(|&p| (xs[p], 1.0)),
            RowSense::Le,
            1.0,
        );
    }
    model
}

/// Solves the linking program with the built-in branch and bound.
pub fn solve_bmgop_ip(inst: &BmgopInstance, limits: Limits) -> Result<BmgopSolution, BmgopError> {
    let g = Grounding::new(&inst.domain);
    let model = build_bmgop_ip(inst);
    let assignment = ip::solve_branch_and_bound(&model, limits)?;
    let pairs = pairs_from_assignment(&model, &assignment);
    let sol = BmgopSolution::from_indices(inst, &g, &pairs);
    match assignment.status {
        IpStatus::Optimal => Ok(sol),
        // the empty selection is always feasible
        IpStatus::Infeasible => unreachable!("linking program without a feasible point"),
        IpStatus::LimitReached => Err(BmgopError::LimitReached {
            best: assignment.values.map(|_| Box::new(sol)),
        }),
    }
}

struct ExactSearch<'a> {
    g: &'a Grounding,
    k: usize,
    budget: f64,
    chosen: Vec<usize>,
    ic_counts: Vec<u8>,
    best: Option<(f64, Vec<usize>)>,
    nodes: Budget,
}

impl ExactSearch<'_> {
    fn fits(&self, p: usize, cost: f64) -> bool {
        cost + self.g.cost(p) <= self.budget + COST_EPS && self.g.pair_ics(p).iter().all(|&ic| self.ic_counts[ic] == 0)
    }

    /// Sum of the `r` largest standalone gains among pairs from `start`.
    fn optimism(&self, start: usize, cost: f64, state: &State, r: usize) -> f64 {
        let mut gains: Vec<f64> = (start..self.g.pair_count())
            .filter(|&p| self.fits(p, cost))
            .map(|p| self.g.marginal_gain(p, state))
            .filter(|&x| x > 0.0)
            .collect();
        gains.sort_by(|a, b| b.total_cmp(a));
        gains.iter().take(r).sum()
    }

    fn offer(&mut self, state: &State) {
        let value = self.g.state_benefit(state);
        let better = match &self.best {
            None => true,
            Some((b, set)) => {
                value > b + TIE_EPS
                    || (value >= b - TIE_EPS && (self.chosen.len(), &self.chosen) < (set.len(), set))
            }
        };
        if better {
            self.best = Some((value, self.chosen.clone()));
        }
    }

    fn walk(&mut self, start: usize, cost: f64, state: &State) {
        if !self.nodes.tick() {
            return;
        }
        self.offer(state);
        let r = self.k - self.chosen.len();
        if r == 0 {
            return;
        }
        let here = self.g.state_benefit(state);
        for p in start..self.g.pair_count() {
            if let Some((b, _)) = &self.best {
                if here + self.optimism(p, cost, state, r) < b - TIE_EPS {
                    return;
                }
            }
            if !self.fits(p, cost) || self.g.marginal_gain(p, state) <= 0.0 {
                continue;
            }
            let mut next = state.clone();
            for &a in self.g.effects(p) {
                next.insert_index(a as usize);
            }
            for &ic in self.g.pair_ics(p) {
                self.ic_counts[ic] += 1;
            }
            self.chosen.push(p);
            self.walk(p + 1, cost + self.g.cost(p), &next);
            self.chosen.pop();
            for &ic in self.g.pair_ics(p) {
                self.ic_counts[ic] -= 1;
            }
            if self.nodes.exhausted() {
                return;
            }
        }
    }
}

/// Maximum-benefit solution by depth-first search over pair subsets of size
/// at most `k`. Pairs that add no benefit are never added. Among optima the
/// smallest set wins, then the lexicographically smallest index list.
pub fn solve_bmgop_exact(inst: &BmgopInstance, limits: Limits) -> Result<BmgopSolution, BmgopError> {
    let g = Grounding::new(&inst.domain);
    let mut search = ExactSearch {
        g: &g,
        k: inst.k,
        budget: inst.budget,
        chosen: Vec::new(),
        ic_counts: vec![0; g.active_ic_count()],
        best: None,
        nodes: Budget::new(limits),
    };
    search.walk(0, 0.0, g.initial());
    let exhausted = search.nodes.exhausted();
    let best = search.best.map(|(_, set)| BmgopSolution::from_indices(inst, &g, &set));
    if exhausted {
        return Err(BmgopError::LimitReached { best: best.map(Box::new) });
    }
    Ok(best.expect("the root node is always offered"))
}

/// Which loop test the greedy uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionMode {
    /// `k*w' + c*w'' + (2 - delta) * sum(w_i) <= lambda`
    #[default]
    Weighted,
    /// `w' + w'' + sum(w_i) <= lambda`
    Plain,
}

impl fmt::Display for ConditionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionMode::Weighted => "weighted",
            ConditionMode::Plain => "plain",
        })
    }
}

impl FromStr for ConditionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "weighted" => Ok(ConditionMode::Weighted),
            "plain" => Ok(ConditionMode::Plain),
            _ => Err(format!("unknown condition mode `{s}` (expected weighted or plain)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub chosen: ActionPoint,
    pub ratio: f64,
    pub gain: f64,
    /// Weights after the update that follows the pick.
    pub w_card: f64,
    pub w_cost: f64,
    pub w_ic: Vec<f64>,
    /// Loop-test value under the updated weights.
    pub condition: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ConditionExceeded,
    AllPairsChosen,
    NoPositiveGain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fixup {
    NotNeeded,
    /// `f(SOL - last) >= f({last})`: the last pick was dropped.
    DroppedLast,
    /// Only the last pick was kept.
    KeptLast,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyStats {
    pub iterations: u64,
    pub candidate_evaluations: u64,
    pub atom_checks: u64,
}

impl GreedyStats {
    pub fn operations(&self) -> u64 {
        self.candidate_evaluations + self.atom_checks
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyTrace {
    pub delta: f64,
    pub lambda: f64,
    pub active_ics: usize,
    pub mode: ConditionMode,
    /// Loop-test value before the first iteration.
    pub initial_condition: f64,
    pub iterations: Vec<IterationRecord>,
    pub stop: StopReason,
    pub fixup: Fixup,
    /// Picks removed by the reverse-order fallback, in removal order.
    pub fallback_removed: Vec<ActionPoint>,
    pub stats: GreedyStats,
}

pub fn lambda(delta: f64, active_ics: usize) -> f64 {
    (2.0 - delta).exp() * (2.0 + active_ics as f64)
}

/// `1 / (2 + |IC_s0|)^(1 / (2 - delta))`.
pub fn approx_bound_value(active_ics: usize, delta: f64) -> f64 {
    (2.0 + active_ics as f64).powf(-1.0 / (2.0 - delta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub value: f64,
    pub active_ics: usize,
    pub applicable: bool,
}

pub fn approx_bound(inst: &BmgopInstance, delta: f64) -> Result<BoundReport, BmgopError> {
    check_delta(delta)?;
    let active = crate::domain::ground_ics_for_state(&inst.domain.ics, &inst.domain.initial).len();
    Ok(BoundReport {
        value: approx_bound_value(active, delta),
        active_ics: active,
        applicable: inst.bound_applies(delta),
    })
}

fn check_delta(delta: f64) -> Result<(), BmgopError> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(BmgopError::BadDelta(delta))
    }
}

fn is_valid(g: &Grounding, inst: &BmgopInstance, sol: &[usize]) -> bool {
    sol.len() <= inst.k && g.total_cost(sol) <= inst.budget + COST_EPS && g.ic_violations(sol).is_empty()
}

/// The multiplicative-weights greedy. Each round picks the pair with the
/// smallest weighted price per unit of marginal gain, then inflates the
/// weights of the constraints it loads. After the loop, an invalid selection
/// is repaired by comparing the last pick against the rest, and if that is
/// still not enough, by dropping picks newest first.
pub fn bmgop_compute(
    inst: &BmgopInstance,
    delta: f64,
    mode: ConditionMode,
) -> Result<(BmgopSolution, GreedyTrace), BmgopError> {
    check_delta(delta)?;
    if inst.k == 0 || inst.budget <= 0.0 {
        return Err(BmgopError::NonPositiveBounds {
            k: inst.k,
            budget: inst.budget,
        });
    }
    let g = Grounding::new(&inst.domain);
    let m = g.active_ic_count();
    let width = 2.0 - delta;
    let lam = lambda(delta, m);
    let k = inst.k as f64;
    let c = inst.budget;
    let mut w_card = 1.0 / k;
    let mut w_cost = 1.0 / c;
    let mut w_ic = vec![1.0 / width; m];
    let condition = |w_card: f64, w_cost: f64, w_ic: &[f64]| {
        let s: f64 = w_ic.iter().sum();
        match mode {
            ConditionMode::Weighted => k * w_card + c * w_cost + width * s,
            ConditionMode::Plain => w_card + w_cost + s,
        }
    };

    let mut stats = GreedyStats::default();
    let mut sol: Vec<usize> = Vec::new();
    let mut in_sol = vec![false; g.pair_count()];
    let mut state = g.initial().clone();
    let mut iterations = Vec::new();
    let initial_condition = condition(w_card, w_cost, &w_ic);
    let mut cond = initial_condition;
    let stop = loop {
        if cond > lam {
            break StopReason::ConditionExceeded;
        }
        if sol.len() == g.pair_count() {
            break StopReason::AllPairsChosen;
        }
        let mut best: Option<(f64, f64, usize)> = None;
        for p in (0..g.pair_count()).filter(|&p| !in_sol[p]) {
            stats.candidate_evaluations += 1;
            stats.atom_checks += g.effects(p).len() as u64;
            let gain = g.marginal_gain(p, &state);
            if gain <= 0.0 {
                continue;
            }
            let price = w_card + w_cost * g.cost(p) + g.pair_ics(p).iter().map(|&i| w_ic[i]).sum::<f64>();
            let ratio = price / gain;
            if best.is_none_or(|(r, _, _)| ratio < r) {
                best = Some((ratio, gain, p));
            }
        }
        let Some((ratio, gain, p)) = best else {
            break StopReason::NoPositiveGain;
        };
        stats.iterations += 1;
        sol.push(p);
        in_sol[p] = true;
        for &a in g.effects(p) {
            state.insert_index(a as usize);
        }
        w_card *= lam.powf(1.0 / k);
        w_cost *= lam.powf(g.cost(p) / c);
        for &i in g.pair_ics(p) {
            w_ic[i] *= lam.powf(1.0 / width);
        }
        cond = condition(w_card, w_cost, &w_ic);
        iterations.push(IterationRecord {
            chosen: inst.domain.pair_at(p),
            ratio,
            gain,
            w_card,
            w_cost,
            w_ic: w_ic.clone(),
            condition: cond,
        });
    };

    let mut fixup = Fixup::NotNeeded;
    if !is_valid(&g, inst, &sol) {
        let last = *sol.last().expect("an empty selection is valid");
        let rest = &sol[..sol.len() - 1];
        if g.objective(rest) >= g.objective(&[last]) {
            sol.pop();
            fixup = Fixup::DroppedLast;
        } else {
            sol = vec![last];
            fixup = Fixup::KeptLast;
        }
    }
    let mut fallback_removed = Vec::new();
    while !is_valid(&g, inst, &sol) {
        let p = sol.pop().expect("an empty selection is valid");
        fallback_removed.push(inst.domain.pair_at(p));
    }

    let mut solution = BmgopSolution::from_indices(inst, &g, &sol);
    if inst.bound_applies(delta) {
        solution.reported_bound = Some(approx_bound_value(m, delta));
    }
    let trace = GreedyTrace {
        delta,
        lambda: lam,
        active_ics: m,
        mode,
        initial_condition,
        iterations,
        stop,
        fixup,
        fallback_removed,
        stats,
    };
    Ok((solution, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ActionId, ActionRule, BenefitModel, CostModel, IntegrityConstraint};
    use crate::formula::Formula;
    use crate::map::{GridMap, Point};
    use crate::state::{GroundAtom, PredicateId};
    use std::collections::BTreeMap;

    const P: Point = Point::new(0, 0);

    fn single_point(preds: usize, effects: &[&[usize]]) -> Domain {
        let mut d = Domain::new(GridMap::new(0, 0), (0..preds).map(|i| format!("g{i}")).collect());
        for (i, e) in effects.iter().enumerate() {
            let mut table = BTreeMap::new();
            table.insert(P, e.iter().map(|&g| GroundAtom::new(PredicateId(g), P)).collect());
            d.actions.push(ActionRule::explicit(format!("a{i}"), table));
        }
        d.benefit = BenefitModel {
            per_predicate: (0..preds).map(|i| (PredicateId(i), 1.0)).collect(),
            overrides: BTreeMap::new(),
        };
        d.cost = CostModel::uniform(1.0);
        d
    }

    fn pair(a: usize) -> ActionPoint {
        ActionPoint::new(ActionId(a), P)
    }

    #[test]
    fn lambda_and_bounds() {
        assert!((lambda(0.001, 1) - 22.145012208385705).abs() < 1e-12);
        assert!((approx_bound_value(0, 0.001) - 0.706984198248454).abs() < 1e-12);
        assert!((approx_bound_value(1, 0.001) - 0.5771916406351068).abs() < 1e-12);
        let curve: Vec<f64> = (0..6).map(|m| approx_bound_value(m, 0.001)).collect();
        assert!(curve.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rejects_bad_parameters() {
        let inst = BmgopInstance::new(single_point(1, &[&[0]]), 1, 1.0).unwrap();
        for d in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(matches!(bmgop_compute(&inst, d, ConditionMode::Weighted), Err(BmgopError::BadDelta(_))));
        }
        let zero = BmgopInstance::new(single_point(1, &[&[0]]), 0, 1.0).unwrap();
        assert!(matches!(
            bmgop_compute(&zero, 0.5, ConditionMode::Weighted),
            Err(BmgopError::NonPositiveBounds { .. })
        ));
    }

    #[test]
    fn exact_with_k_zero_is_empty() {
        let mut d = single_point(2, &[&[0]]);
        d.initial = State::from_indices(d.universe(), [1]);
        let inst = BmgopInstance::new(d, 0, 1.0).unwrap();
        let sol = solve_bmgop_exact(&inst, Limits::default()).unwrap();
        assert!(sol.pairs.is_empty());
        assert_eq!(sol.achieved_benefit, 1.0);
    }

    #[test]
    fn max_cover_small() {
        // S = {1..5}, H = {{1,2,3},{3,4},{4,5},{1}}, K = 2
        let d = single_point(5, &[&[0, 1, 2], &[2, 3], &[3, 4], &[0]]);
        let inst = BmgopInstance::new(d, 2, 2.0).unwrap();
        let exact = solve_bmgop_exact(&inst, Limits::default()).unwrap();
        assert_eq!(exact.achieved_benefit, 5.0);
        assert_eq!(exact.pairs, vec![pair(0), pair(2)]);
        let ip = solve_bmgop_ip(&inst, Limits::default()).unwrap();
        assert_eq!(ip.achieved_benefit, 5.0);
        let (greedy, trace) = bmgop_compute(&inst, 0.001, ConditionMode::Weighted).unwrap();
        assert!(greedy.achieved_benefit >= 0.7 * 5.0);
        assert_eq!(trace.iterations[0].chosen, pair(0));
    }

    #[test]
    fn unproducible_atom_forces_y_to_zero() {
        let d = single_point(2, &[&[0]]);
        let inst = BmgopInstance::new(d, 1, 1.0).unwrap();
        let model = build_bmgop_ip(&inst);
        let row = model.constraints().iter().find(|c| c.label == "link_g1_0_0").unwrap();
        assert_eq!(row.terms.len(), 1);
        assert_eq!(row.terms[0].1, -1.0);
        assert_eq!(row.rhs, 0.0);
    }

    #[test]
    fn fixup_keeps_the_better_side() {
        // a2 never helps; it only makes a1 sit in a second constraint so a0 goes first
        let mut d = single_point(2, &[&[0], &[1], &[]]);
        d.cost = CostModel::uniform(0.0);
        d.benefit.overrides.insert(GroundAtom::new(PredicateId(1), P), 1.3);
        d.ics.push(IntegrityConstraint::new([pair(0), pair(1)], Formula::True));
        d.ics.push(IntegrityConstraint::new([pair(1), pair(2)], Formula::True));
        let inst = BmgopInstance::new(d, 5, 5.0).unwrap();
        let (sol, trace) = bmgop_compute(&inst, 0.001, ConditionMode::Plain).unwrap();
        let picks: Vec<_> = trace.iterations.iter().map(|r| r.chosen).collect();
        assert_eq!(picks, vec![pair(0), pair(1)]);
        assert_eq!(trace.fixup, Fixup::KeptLast);
        assert_eq!(sol.pairs, vec![pair(1)]);
        assert!(validate_bmgop(&inst, &sol.pairs).is_empty());
    }

    #[test]
    fn fixup_drops_the_weaker_last() {
        let mut d = single_point(3, &[&[0], &[1, 2]]);
        d.cost = CostModel::uniform(0.0);
        d.ics.push(IntegrityConstraint::new([pair(0), pair(1)], Formula::True));
        let inst = BmgopInstance::new(d, 5, 5.0).unwrap();
        let (sol, trace) = bmgop_compute(&inst, 0.001, ConditionMode::Plain).unwrap();
        assert_eq!(trace.iterations.len(), 2);
        assert_eq!(trace.fixup, Fixup::DroppedLast);
        assert_eq!(sol.pairs, vec![pair(1)]);
    }

    #[test]
    fn fallback_trims_until_valid() {
        // a single pick of cost 1 on a budget of 0.5
        let d = single_point(1, &[&[0]]);
        let inst = BmgopInstance::new(d, 1, 0.5).unwrap();
        let (sol, trace) = bmgop_compute(&inst, 0.5, ConditionMode::Plain).unwrap();
        assert_eq!(trace.fixup, Fixup::KeptLast);
        assert_eq!(trace.fallback_removed, vec![pair(0)]);
        assert!(sol.pairs.is_empty());
        assert!(sol.reported_bound.is_none());
    }

    #[test]
    fn no_gain_stops_the_loop() {
        let d = single_point(1, &[&[], &[]]);
        let inst = BmgopInstance::new(d, 2, 2.0).unwrap();
        let (sol, trace) = bmgop_compute(&inst, 0.001, ConditionMode::Weighted).unwrap();
        assert_eq!(trace.stop, StopReason::NoPositiveGain);
        assert!(sol.pairs.is_empty());
    }

    #[test]
    fn objective_matches_grounding() {
        let d = single_point(3, &[&[0, 1], &[1, 2]]);
        let inst = BmgopInstance::new(d, 2, 2.0).unwrap();
        assert_eq!(objective_f(&inst, &[]), 0.0);
        assert_eq!(objective_f(&inst, &[pair(0)]), 2.0);
        assert_eq!(objective_f(&inst, &[pair(0), pair(1)]), 3.0);
    }

    #[test]
    fn condition_mode_parses() {
        assert_eq!("plain".parse::<ConditionMode>().unwrap(), ConditionMode::Plain);
        assert!("other".parse::<ConditionMode>().is_err());
        assert_eq!(ConditionMode::default().to_string(), "weighted");
    }
}
