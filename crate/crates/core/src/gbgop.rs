//! Goal-based instances: find the fewest action-point pairs whose combined
//! effects make every atom of `theta_in` true and leave every atom of
//! `theta_out` false, within the cost budget and the integrity constraints.
//!
//! Besides validation and an exact search, this module builds the covering
//! integer program and its reduced form. The reduction keeps only pairs of
//! `R` (pairs that never produce a forbidden atom) that are not dominated by
//! a pair that is at most as expensive, sits in no more active constraints,
//! and makes at least the same missing goal atoms true.

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::domain::{ActionPoint, Domain, ModelError};
use crate::ground::Grounding;
use crate::ip::{self, IpAssignment, IpError, IpModel, IpStatus, RowSense, Sense, VarTag};
use crate::limits::{Budget, Limits};
use crate::state::{GroundAtom, State};

const COST_EPS: f64 = 1e-9;

/// Pairs beyond this make solution counting refuse to run.
pub const COUNT_GUARD: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct GbgopInstance {
    pub domain: Domain,
    pub budget: f64,
    pub theta_in: Vec<GroundAtom>,
    pub theta_out: Vec<GroundAtom>,
}

impl GbgopInstance {
    /// Validates the domain, the budget, and that the goal sets are in bounds
    /// and disjoint. Goal lists are sorted and deduplicated.
    pub fn new(
        domain: Domain,
        budget: f64,
        mut theta_in: Vec<GroundAtom>,
        mut theta_out: Vec<GroundAtom>,
    ) -> Result<Self, ModelError> {
        theta_in.sort_unstable();
        theta_in.dedup();
        theta_out.sort_unstable();
        theta_out.dedup();
        let inst = GbgopInstance {
            domain,
            budget,
            theta_in,
            theta_out,
        };
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
        for a in self.theta_in.iter().chain(&self.theta_out) {
            self.domain.check_atom("goal set", a)?;
        }
        let overlap: Vec<_> = self.theta_in.iter().filter(|a| self.theta_out.contains(a)).collect();
        if let Some(first) = overlap.first() {
            return Err(ModelError::GoalsOverlap {
                count: overlap.len(),
                example: self.domain.atom_name(first),
            });
        }
        Ok(())
    }

    pub fn theta_in_state(&self) -> State {
        State::from_atoms(self.domain.universe(), &self.theta_in)
    }

    pub fn theta_out_state(&self) -> State {
        State::from_atoms(self.domain.universe(), &self.theta_out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbgopSolution {
    pub pairs: Vec<ActionPoint>,
    pub total_cost: f64,
    pub final_state: State,
    pub cardinality: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `s0` already contains forbidden atoms; no action removes atoms.
    InherentlyInfeasible { atoms: Vec<GroundAtom> },
    CostExceeded { total: f64, budget: f64 },
    /// Indices into `Domain::ics`.
    IntegrityViolated { constraints: Vec<usize> },
    GoalsMissing { atoms: Vec<GroundAtom> },
    ForbiddenProduced { atoms: Vec<GroundAtom> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the three solution conditions (cost, integrity, goals) and
/// reports every failure.
pub fn validate_gbgop(inst: &GbgopInstance, sol: &[ActionPoint]) -> Validation {
    let d = &inst.domain;
    let mut violations = Vec::new();
    let preexisting: Vec<_> = inst.theta_out.iter().filter(|a| d.initial.contains(a)).copied().collect();
    if !preexisting.is_empty() {
        violations.push(Violation::InherentlyInfeasible { atoms: preexisting });
    }
    let mut chosen = sol.to_vec();
    chosen.sort_unstable();
    chosen.dedup();
    let total: f64 = chosen.iter().map(|&p| d.cost_of(p)).sum();
    if total > inst.budget + COST_EPS {
        violations.push(Violation::CostExceeded {
            total,
            budget: inst.budget,
        });
    }
    let ics = d.check_ics(&chosen);
    if !ics.is_satisfied() {
        violations.push(Violation::IntegrityViolated {
            constraints: ics.violated,
        });
    }
    let after = d.appl(&chosen, &d.initial);
    let missing: Vec<_> = inst.theta_in.iter().filter(|a| !after.contains(a)).copied().collect();
    if !missing.is_empty() {
        violations.push(Violation::GoalsMissing { atoms: missing });
    }
    let produced: Vec<_> = inst
        .theta_out
        .iter()
        .filter(|a| after.contains(a) && !d.initial.contains(a))
        .copied()
        .collect();
    if !produced.is_empty() {
        violations.push(Violation::ForbiddenProduced { atoms: produced });
    }
    Validation { violations }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GbgopError {
    #[error("infeasible: the initial state already holds {} forbidden atom(s)", atoms.len())]
    InherentlyInfeasible { atoms: Vec<GroundAtom> },
    #[error("infeasible: uncoverable atoms {}", names.join(", "))]
    Uncoverable { atoms: Vec<GroundAtom>, names: Vec<String> },
    #[error("infeasible: no set of pairs satisfies the budget, constraints and goals")]
    Infeasible,
    #[error("search limit reached before optimality was proven")]
    LimitReached { best: Option<Box<GbgopSolution>> },
    #[error(
        "refusing to count solutions over {pairs} action-point pairs (limit {COUNT_GUARD}): counting is #P-complete, \
         and approximating the count within 2^(|AxM|^(1-e)) is NP-hard"
    )]
    TooLargeToCount { pairs: usize },
    #[error(transparent)]
    Ip(#[from] IpError),
}

/// Grounded view with goal bitmaps and `theta_in - s0`.
struct Prepared {
    g: Grounding,
    theta_out: State,
    /// Goal atoms not already true in `s0`.
    need: State,
}

impl Prepared {
    fn new(inst: &GbgopInstance) -> Self {
        let g = Grounding::new(&inst.domain);
        let need = inst.theta_in_state().difference(g.initial());
        Prepared {
            theta_out: inst.theta_out_state(),
            need,
            g,
        }
    }

    fn in_r(&self, pair: usize) -> bool {
        self.g.effects(pair).iter().all(|&a| !self.theta_out.contains_index(a as usize))
    }

    fn r(&self) -> Vec<usize> {
        (0..self.g.pair_count()).filter(|&p| self.in_r(p)).collect()
    }

    fn affected(&self, pair: usize) -> FixedBitSet {
        let mut bits = FixedBitSet::with_capacity(self.g.atom_count());
        for &a in self.g.effects(pair) {
            if self.need.contains_index(a as usize) {
                bits.insert(a as usize);
            }
        }
        bits
    }

    /// Pairs of R* in canonical order.
    fn r_star(&self, r: &[usize]) -> Vec<usize> {
        let aff: Vec<FixedBitSet> = r.iter().map(|&p| self.affected(p)).collect();
        let q: Vec<&[usize]> = r.iter().map(|&p| self.g.pair_ics(p)).collect();
        let cost: Vec<f64> = r.iter().map(|&p| self.g.cost(p)).collect();
        // j dominates i: no dearer, in no extra constraint, affects a superset
        let dominates = |j: usize, i: usize| {
            cost[j] <= cost[i] && q[j].iter().all(|c| q[i].contains(c)) && aff[i].is_subset(&aff[j])
        };
        (0..r.len())
            .filter(|&i| {
                !(0..r.len()).any(|j| j != i && dominates(j, i) && (j < i || !dominates(i, j)))
            })
            .map(|i| r[i])
            .collect()
    }

    fn uncoverable(&self, candidates: &[usize]) -> Vec<usize> {
        let mut produced = FixedBitSet::with_capacity(self.g.atom_count());
        for &p in candidates {
            for &a in self.g.effects(p) {
                produced.insert(a as usize);
            }
        }
        self.need.indices().filter(|&a| !produced.contains(a)).collect()
    }

    fn preexisting_forbidden(&self) -> Vec<usize> {
        self.theta_out.intersection(self.g.initial()).indices().collect()
    }

    fn solution(&self, inst: &GbgopInstance, pairs: &[usize]) -> GbgopSolution {
        let mut pairs = pairs.to_vec();
        pairs.sort_unstable();
        GbgopSolution {
            pairs: pairs.iter().map(|&p| inst.domain.pair_at(p)).collect(),
            total_cost: self.g.total_cost(&pairs),
            final_state: self.g.appl(&pairs),
            cardinality: pairs.len(),
        }
    }
}

/// `R`: pairs whose effects avoid `theta_out`, in canonical order.
pub fn restricted_pairs(inst: &GbgopInstance) -> Vec<ActionPoint> {
    let prep = Prepared::new(inst);
    prep.r().into_iter().map(|p| inst.domain.pair_at(p)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub r: Vec<ActionPoint>,
    pub r_star: Vec<ActionPoint>,
}

impl Reduction {
    pub fn r_len(&self) -> usize {
        self.r.len()
    }

    pub fn r_star_len(&self) -> usize {
        self.r_star.len()
    }
}

/// `R*` by pairwise scan over `R`. Among pairs that dominate each other the
/// canonically first one is kept; every other dominated pair is dropped.
pub fn reduce_to_r_star(inst: &GbgopInstance) -> Reduction {
    let prep = Prepared::new(inst);
    let r = prep.r();
    let star = prep.r_star(&r);
    Reduction {
        r: r.into_iter().map(|p| inst.domain.pair_at(p)).collect(),
        r_star: star.into_iter().map(|p| inst.domain.pair_at(p)).collect(),
    }
}

fn atom_label(domain: &Domain, index: usize) -> String {
    let atom = domain.universe().atom_at(index);
    format!("{}_{}_{}", domain.predicates[atom.predicate.0], atom.point.x, atom.point.y)
}

pub(crate) fn pair_var_name(domain: &Domain, index: usize) -> String {
    let pair = domain.pair_at(index);
    format!("x_{}_{}_{}", domain.actions[pair.action.0].name, pair.point.x, pair.point.y)
}

fn uncoverable_error(inst: &GbgopInstance, atoms: Vec<usize>) -> GbgopError {
    let u = inst.domain.universe();
    let atoms: Vec<GroundAtom> = atoms.into_iter().map(|a| u.atom_at(a)).collect();
    let names = atoms.iter().map(|a| inst.domain.atom_name(a)).collect();
    GbgopError::Uncoverable { atoms, names }
}

/// The covering program: minimize the number of chosen pairs, cover each
/// missing goal atom, stay within budget, and pick at most one member of each
/// active integrity constraint. Variables range over `R`, or over `R*` when
/// `use_reduction` is set.
pub fn build_gbgop_ip(inst: &GbgopInstance, use_reduction: bool) -> Result<IpModel, GbgopError> {
    let prep = Prepared::new(inst);
    let r = prep.r();
    let vars = if use_reduction { prep.r_star(&r) } else { r };
    let missing = prep.uncoverable(&vars);
    if !missing.is_empty() {
        return Err(uncoverable_error(inst, missing));
    }
    Ok(covering_model(inst, &prep, &vars))
}

fn covering_model(inst: &GbgopInstance, prep: &Prepared, vars: &[usize]) -> IpModel {
    let d = &inst.domain;
    let mut model = IpModel::new(Sense::Minimize);
    let mut var_of = vec![usize::MAX; prep.g.pair_count()];
    for &p in vars {
        var_of[p] = model.add_variable(pair_var_name(d, p), Some(VarTag::Pair(p)), 1.0);
    }
    let mut producers: Vec<Vec<usize>> = vec![Vec::new(); prep.g.atom_count()];
    for &p in vars {
        for &a in prep.g.effects(p) {
            producers[a as usize].push(var_of[p]);
        }
    }
    for a in prep.need.indices() {
        model.add_constraint(
            format!("cover_{}", atom_label(d, a)),
            producers[a].iter().map(|&v| (v, 1.0)),
            RowSense::Ge,
            1.0,
        );
    }
    model.add_constraint(
        "budget",
        vars.iter().map(|&p| (var_of[p], prep.g.cost(p))),
        RowSense::Le,
        inst.budget,
    );
    for pos in 0..prep.g.active_ic_count() {
        let members = prep.g.ic_members(pos).iter().filter(|&&p| var_of[p] != usize::MAX);
        model.add_constraint(
            format!("ic_{}", prep.g.active_ics()[pos]),
            members.map(|&p| (var_of[p], 1.0)),
            RowSense::Le,
            1.0,
        );
    }
    model
}

/// Reads the chosen pairs off the `X` variables of an IP assignment.
pub fn pairs_from_assignment(model: &IpModel, assignment: &IpAssignment) -> Vec<usize> {
    assignment
        .ones()
        .into_iter()
        .filter_map(|v| match model.variables()[v].tag {
            Some(VarTag::Pair(p)) => Some(p),
            _ => None,
        })
        .collect()
}

/// Solves the covering program with the built-in branch and bound.
pub fn solve_gbgop_ip(inst: &GbgopInstance, use_reduction: bool, limits: Limits) -> Result<GbgopSolution, GbgopError> {
    let prep = Prepared::new(inst);
    let forbidden = prep.preexisting_forbidden();
    if !forbidden.is_empty() {
        let u = inst.domain.universe();
        return Err(GbgopError::InherentlyInfeasible {
            atoms: forbidden.into_iter().map(|a| u.atom_at(a)).collect(),
        });
    }
    let model = build_gbgop_ip(inst, use_reduction)?;
    let assignment = ip::solve_branch_and_bound(&model, limits)?;
    let pairs = pairs_from_assignment(&model, &assignment);
    match assignment.status {
        IpStatus::Optimal => Ok(prep.solution(inst, &pairs)),
        IpStatus::Infeasible => Err(GbgopError::Infeasible),
        IpStatus::LimitReached => Err(GbgopError::LimitReached {
            best: assignment.values.map(|_| Box::new(prep.solution(inst, &pairs))),
        }),
    }
}

/// Enumerates t-subsets (in canonical order) of `candidates`, skipping
/// prefixes that already break the budget or an integrity constraint.
struct SubsetSearch<'a> {
    prep: &'a Prepared,
    candidates: &'a [usize],
    budget_limit: f64,
    ic_counts: Vec<u8>,
    cover: Vec<u32>,
    uncovered: usize,
    chosen: Vec<usize>,
    nodes: Budget,
}

impl SubsetSearch<'_> {
    fn search(&mut self, start: usize, remaining: usize, cost: f64) -> bool {
        if !self.nodes.tick() {
            return false;
        }
        if remaining == 0 {
            return self.uncovered == 0;
        }
        if self.candidates.len() - start < remaining {
            return false;
        }
        for idx in start..=self.candidates.len() - remaining {
            let p = self.candidates[idx];
            let c = cost + self.prep.g.cost(p);
            if c > self.budget_limit + COST_EPS {
                continue;
            }
            if self.prep.g.pair_ics(p).iter().any(|&ic| self.ic_counts[ic] >= 1) {
                continue;
            }
            self.push(p);
            if self.search(idx + 1, remaining - 1, c) {
                return true;
            }
            self.pop(p);
            if self.nodes.exhausted() {
                return false;
            }
        }
        false
    }

    fn push(&mut self, p: usize) {
        for &ic in self.prep.g.pair_ics(p) {
            self.ic_counts[ic] += 1;
        }
        for &a in self.prep.g.effects(p) {
            if self.prep.need.contains_index(a as usize) {
                if self.cover[a as usize] == 0 {
                    self.uncovered -= 1;
                }
                self.cover[a as usize] += 1;
            }
        }
        self.chosen.push(p);
    }

    fn pop(&mut self, p: usize) {
        for &ic in self.prep.g.pair_ics(p) {
            self.ic_counts[ic] -= 1;
        }
        for &a in self.prep.g.effects(p) {
            if self.prep.need.contains_index(a as usize) {
                self.cover[a as usize] -= 1;
                if self.cover[a as usize] == 0 {
                    self.uncovered += 1;
                }
            }
        }
        self.chosen.pop();
    }
}

/// Minimum-cardinality solution by iterative deepening over subsets of `R*`.
/// The first valid subset in canonical order at the smallest size wins.
pub fn solve_gbgop_exact(inst: &GbgopInstance, limits: Limits) -> Result<GbgopSolution, GbgopError> {
    let prep = Prepared::new(inst);
    let forbidden = prep.preexisting_forbidden();
    if !forbidden.is_empty() {
        let u = inst.domain.universe();
        return Err(GbgopError::InherentlyInfeasible {
            atoms: forbidden.into_iter().map(|a| u.atom_at(a)).collect(),
        });
    }
    let r = prep.r();
    let missing = prep.uncoverable(&r);
    if !missing.is_empty() {
        return Err(uncoverable_error(inst, missing));
    }
    let star = prep.r_star(&r);
    let mut search = SubsetSearch {
        prep: &prep,
        candidates: &star,
        budget_limit: inst.budget,
        ic_counts: vec![0; prep.g.active_ic_count()],
        cover: vec![0; prep.g.atom_count()],
        uncovered: prep.need.len(),
        chosen: Vec::new(),
        nodes: Budget::new(limits),
    };
    for t in 0..=star.len() {
        if search.search(0, t, 0.0) {
            let chosen = search.chosen.clone();
            return Ok(prep.solution(inst, &chosen));
        }
        if search.nodes.exhausted() {
            return Err(GbgopError::LimitReached { best: None });
        }
    }
    Err(GbgopError::Infeasible)
}

/// Number of pair sets satisfying all three solution conditions, stopping at
/// `cap`. Refuses instances with more than [`COUNT_GUARD`] pairs.
pub fn count_gbgop_solutions(inst: &GbgopInstance, cap: u64) -> Result<u64, GbgopError> {
    let n = inst.domain.pair_count();
    if n > COUNT_GUARD {
        return Err(GbgopError::TooLargeToCount { pairs: n });
    }
    let prep = Prepared::new(inst);
    if !prep.preexisting_forbidden().is_empty() {
        return Ok(0);
    }
    struct Counter<'a> {
        prep: &'a Prepared,
        budget: f64,
        cap: u64,
        count: u64,
        ic_counts: Vec<u8>,
        cover: Vec<u32>,
        uncovered: usize,
    }
    impl Counter<'_> {
        fn walk(&mut self, pair: usize, cost: f64) {
            if self.count >= self.cap {
                return;
            }
            if pair == self.prep.g.pair_count() {
                if self.uncovered == 0 {
                    self.count += 1;
                }
                return;
            }
            self.walk(pair + 1, cost);
            let c = cost + self.prep.g.cost(pair);
            let g = &self.prep.g;
            if c > self.budget + COST_EPS
                || !self.prep.in_r(pair)
                || g.pair_ics(pair).iter().any(|&ic| self.ic_counts[ic] >= 1)
            {
                return;
            }
            for &ic in g.pair_ics(pair) {
                self.ic_counts[ic] += 1;
            }
            for &a in g.effects(pair) {
                if self.prep.need.contains_index(a as usize) {
                    if self.cover[a as usize] == 0 {
                        self.uncovered -= 1;
                    }
                    self.cover[a as usize] += 1;
                }
            }
            self.walk(pair + 1, c);
            for &ic in g.pair_ics(pair) {
                self.ic_counts[ic] -= 1;
            }
            for &a in g.effects(pair) {
                if self.prep.need.contains_index(a as usize) {
                    self.cover[a as usize] -= 1;
                    if self.cover[a as usize] == 0 {
                        self.uncovered += 1;
                    }
                }
            }
        }
    }
    let mut counter = Counter {
        prep: &prep,
        budget: inst.budget,
        cap,
        count: 0,
        ic_counts: vec![0; prep.g.active_ic_count()],
        cover: vec![0; prep.g.atom_count()],
        uncovered: prep.need.len(),
    };
    counter.walk(0, 0.0);
    Ok(counter.count)
}

/// All of `R` at once: never produces a forbidden atom but ignores cost and
/// constraints, so it is only returned when it validates.
pub fn feasibility_heuristic(inst: &GbgopInstance) -> Option<GbgopSolution> {
    let prep = Prepared::new(inst);
    let r = prep.r();
    let pairs: Vec<ActionPoint> = r.iter().map(|&p| inst.domain.pair_at(p)).collect();
    validate_gbgop(inst, &pairs).is_valid().then(|| prep.solution(inst, &r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ActionId, ActionRule, IntegrityConstraint};
    use crate::formula::Formula;
    use crate::map::{GridMap, Point};
    use crate::state::PredicateId;
    use std::collections::BTreeMap;

    const P: Point = Point::new(0, 0);

    /// Single-point domain with one explicit action per effect list.
    fn single_point(preds: usize, effects: &[&[usize]]) -> Domain {
        let mut d = Domain::new(GridMap::new(0, 0), (0..preds).map(|i| format!("g{i}")).collect());
        for (i, e) in effects.iter().enumerate() {
            let mut table = BTreeMap::new();
            table.insert(P, e.iter().map(|&g| GroundAtom::new(PredicateId(g), P)).collect());
            d.actions.push(ActionRule::explicit(format!("a{i}"), table));
        }
        d
    }

    fn atom(g: usize) -> GroundAtom {
        GroundAtom::new(PredicateId(g), P)
    }

    fn pair(a: usize) -> ActionPoint {
        ActionPoint::new(ActionId(a), P)
    }

    #[test]
    fn empty_solution_when_goals_hold() {
        let mut d = single_point(2, &[&[0]]);
        d.initial = State::from_atoms(d.universe(), [&atom(0)]);
        let inst = GbgopInstance::new(d, 1.0, vec![atom(0)], vec![atom(1)]).unwrap();
        assert!(validate_gbgop(&inst, &[]).is_valid());
        let sol = solve_gbgop_exact(&inst, Limits::default()).unwrap();
        assert_eq!(sol.cardinality, 0);
        let model = build_gbgop_ip(&inst, true).unwrap();
        assert!(model.constraints().iter().all(|c| !c.label.starts_with("cover")));
        let ip_sol = solve_gbgop_ip(&inst, true, Limits::default()).unwrap();
        assert_eq!(ip_sol.cardinality, 0);
    }

    #[test]
    fn forbidden_effects_are_reported() {
        let d = single_point(2, &[&[0, 1]]);
        let inst = GbgopInstance::new(d, 1.0, vec![atom(0)], vec![atom(1)]).unwrap();
        let v = validate_gbgop(&inst, &[pair(0)]);
        assert!(matches!(v.violations.as_slice(), [Violation::ForbiddenProduced { .. }]));
        assert!(restricted_pairs(&inst).is_empty());
        assert!(matches!(solve_gbgop_exact(&inst, Limits::default()), Err(GbgopError::Uncoverable { .. })));
    }

    #[test]
    fn preexisting_forbidden_atoms() {
        let mut d = single_point(2, &[&[0]]);
        d.initial = State::from_atoms(d.universe(), [&atom(1)]);
        let inst = GbgopInstance::new(d, 1.0, vec![atom(0)], vec![atom(1)]).unwrap();
        let v = validate_gbgop(&inst, &[pair(0)]);
        assert!(matches!(v.violations[0], Violation::InherentlyInfeasible { .. }));
        assert_eq!(count_gbgop_solutions(&inst, u64::MAX).unwrap(), 0);
        assert!(matches!(solve_gbgop_exact(&inst, Limits::default()), Err(GbgopError::InherentlyInfeasible { .. })));
    }

    #[test]
    fn overlapping_goals_are_rejected() {
        let d = single_point(1, &[]);
        let err = GbgopInstance::new(d, 1.0, vec![atom(0)], vec![atom(0)]).unwrap_err();
        assert_eq!(err.code(), "E_GOALS_NOT_DISJOINT");
    }

    #[test]
    fn cost_and_integrity_violations() {
        let mut d = single_point(2, &[&[0], &[1]]);
        d.cost = crate::domain::CostModel::uniform(0.75);
        d.ics.push(IntegrityConstraint::new([pair(0), pair(1)], Formula::True));
        let inst = GbgopInstance::new(d, 1.0, vec![atom(0), atom(1)], vec![]).unwrap();
        let v = validate_gbgop(&inst, &[pair(0), pair(1)]);
        assert_eq!(v.violations.len(), 2);
        assert!(matches!(v.violations[0], Violation::CostExceeded { .. }));
        assert!(matches!(v.violations[1], Violation::IntegrityViolated { .. }));
        assert_eq!(solve_gbgop_exact(&inst, Limits::default()), Err(GbgopError::Infeasible));
        assert_eq!(solve_gbgop_ip(&inst, false, Limits::default()), Err(GbgopError::Infeasible));
    }

    #[test]
    fn forbidden_everywhere_keeps_only_silent_pairs() {
        let d = single_point(2, &[&[0], &[], &[1]]);
        let all = crate::state::enumerate_ground_atoms(d.map, 2);
        let inst = GbgopInstance::new(d, 3.0, vec![], all).unwrap();
        assert_eq!(restricted_pairs(&inst), vec![pair(1)]);
    }

    #[test]
    fn identical_pairs_keep_the_first() {
        let d = single_point(1, &[&[0], &[0], &[0]]);
        let inst = GbgopInstance::new(d, 3.0, vec![atom(0)], vec![]).unwrap();
        let red = reduce_to_r_star(&inst);
        assert_eq!(red.r_len(), 3);
        assert_eq!(red.r_star, vec![pair(0)]);
    }

    #[test]
    fn small_set_cover() {
        // S = {1,2,3}, H = {{1,2},{2,3},{3}}
        let d = single_point(3, &[&[0, 1], &[1, 2], &[2]]);
        let inst = GbgopInstance::new(d, 3.0, vec![atom(0), atom(1), atom(2)], vec![]).unwrap();
        assert_eq!(solve_gbgop_exact(&inst, Limits::default()).unwrap().cardinality, 2);
        let model = build_gbgop_ip(&inst, false).unwrap();
        let a = ip::solve_branch_and_bound(&model, Limits::default()).unwrap();
        assert_eq!(a.objective_value, Some(2.0));
    }

    #[test]
    fn counting_small_spaces() {
        let d = single_point(1, &[&[], &[]]);
        let mut d = d;
        d.cost = crate::domain::CostModel::uniform(0.0);
        let inst = GbgopInstance::new(d, 0.0, vec![], vec![]).unwrap();
        assert_eq!(count_gbgop_solutions(&inst, u64::MAX).unwrap(), 4);
        assert_eq!(count_gbgop_solutions(&inst, 3).unwrap(), 3);
    }

    #[test]
    fn counting_refuses_large_spaces() {
        let mut d = Domain::new(GridMap::new(4, 4), vec!["g".into()]);
        d.actions.push(ActionRule::explicit("a", BTreeMap::new()));
        let inst = GbgopInstance::new(d, 1.0, vec![], vec![]).unwrap();
        let err = count_gbgop_solutions(&inst, 10).unwrap_err();
        assert!(err.to_string().contains("#P-complete"));
    }

    #[test]
    fn heuristic_validates_or_declines() {
        let d = single_point(2, &[&[0], &[1]]);
        let inst = GbgopInstance::new(d.clone(), 2.0, vec![atom(0), atom(1)], vec![]).unwrap();
        assert_eq!(feasibility_heuristic(&inst).unwrap().cardinality, 2);
        let tight = GbgopInstance::new(d, 1.0, vec![atom(0), atom(1)], vec![]).unwrap();
        assert!(feasibility_heuristic(&tight).is_none());
    }
}
