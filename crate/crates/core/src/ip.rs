//! Binary integer programs: the model type, an exact depth-first
//! branch-and-bound solver for desk-scale models, and a CPLEX-style LP writer
//! for handing larger models to an external solver.
//!
//! The solver branches in variable order. Value 1 is tried first when
//! maximizing and 0 first when minimizing. Two prunings apply at every node:
//!
//! * activity bounds: a `<=` row whose smallest reachable left-hand side
//!   already exceeds its right-hand side (or a `>=` row whose largest
//!   reachable left-hand side falls short) is infeasible;
//! * objective bound: current value plus every improving coefficient of the
//!   unfixed variables must strictly beat the incumbent.
//!
//! Because pruning is non-strict on ties, the incumbent is the first optimal
//! assignment met in branching order.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::limits::{Budget, Limits};
use crate::num::fmt_num;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
}

/// What a variable stands for in the originating problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarTag {
    Pair(usize),
    Atom(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub tag: Option<VarTag>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub label: String,
    /// Sorted by variable index, no duplicates.
    pub terms: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[bool]) -> f64 {
        self.terms.iter().filter(|(v, _)| values[*v]).map(|(_, c)| c).sum()
    }

    pub fn holds(&self, values: &[bool]) -> bool {
        let a = self.activity(values);
        match self.sense {
            RowSense::Le => a <= self.rhs + EPS,
            RowSense::Ge => a >= self.rhs - EPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IpError {
    #[error("variable name `{0}` is declared twice")]
    DuplicateVariable(String),
    #[error("constraint `{label}` refers to undeclared variable #{index}")]
    UnknownVariable { label: String, index: usize },
    #[error("non-finite coefficient in `{0}`")]
    NonFinite(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpModel {
    pub sense: Sense,
    pub constant: f64,
    variables: Vec<Variable>,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

impl IpModel {
    pub fn new(sense: Sense) -> Self {
        IpModel {
            sense,
            constant: 0.0,
            variables: Vec::new(),
            objective: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_variable(&mut self, name: impl Into<String>, tag: Option<VarTag>, objective: f64) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            tag,
        });
        self.objective.push(objective);
        self.variables.len() - 1
    }

    /// Adds a row; repeated variables have their coefficients merged.
    pub fn add_constraint(
        &mut self,
        label: impl Into<String>,
        terms: impl IntoIterator<Item = (usize, f64)>,
        sense: RowSense,
        rhs: f64,
    ) {
        let mut merged: Vec<(usize, f64)> = Vec::new();
        let mut terms: Vec<_> = terms.into_iter().collect();
        terms.sort_by_key(|t| t.0);
        for (v, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += c,
                _ => merged.push((v, c)),
            }
        }
        self.constraints.push(Constraint {
            label: label.into(),
            terms: merged,
            sense,
            rhs,
        });
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn validate(&self) -> Result<(), IpError> {
        let mut names = BTreeSet::new();
        for v in &self.variables {
            if !names.insert(v.name.as_str()) {
                return Err(IpError::DuplicateVariable(v.name.clone()));
            }
        }
        if !self.constant.is_finite() || self.objective.iter().any(|c| !c.is_finite()) {
            return Err(IpError::NonFinite("objective".into()));
        }
        for c in &self.constraints {
            if let Some(&(index, _)) = c.terms.iter().find(|(v, _)| *v >= self.variables.len()) {
                return Err(IpError::UnknownVariable {
                    label: c.label.clone(),
                    index,
                });
            }
            if !c.rhs.is_finite() || c.terms.iter().any(|(_, k)| !k.is_finite()) {
                return Err(IpError::NonFinite(c.label.clone()));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, values: &[bool]) -> f64 {
        self.constant
            + self
                .objective
                .iter()
                .zip(values)
                .filter(|(_, &x)| x)
                .map(|(c, _)| c)
                .sum::<f64>()
    }

    pub fn is_feasible(&self, values: &[bool]) -> bool {
        values.len() == self.variables.len() && self.constraints.iter().all(|c| c.holds(values))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpStatus {
    Optimal,
    Infeasible,
    /// A budget ran out; any incumbent is feasible but not proven optimal.
    LimitReached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpAssignment {
    pub status: IpStatus,
    /// Best assignment found, if any.
    pub values: Option<Vec<bool>>,
    pub objective_value: Option<f64>,
    pub nodes: u64,
}

impl IpAssignment {
    /// Indices of the variables set to 1.
    pub fn ones(&self) -> Vec<usize> {
        self.values
            .iter()
            .flat_map(|v| v.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| i))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchOptions {
    /// Disable to enumerate every leaf; used to cross-check the prunings.
    pub prune: bool,
}

impl Default for BranchOptions {
    fn default() -> Self {
        BranchOptions { prune: true }
    }
}

pub fn solve_branch_and_bound(model: &IpModel, limits: Limits) -> Result<IpAssignment, IpError> {
    solve_branch_and_bound_with(model, limits, BranchOptions::default())
}

pub fn solve_branch_and_bound_with(
    model: &IpModel,
    limits: Limits,
    options: BranchOptions,
) -> Result<IpAssignment, IpError> {
    model.validate()?;
    let mut search = Search::new(model, limits, options);
    let root_ok = search.rows.iter().all(|r| r.satisfiable());
    if root_ok || !options.prune {
        search.descend(0);
    }
    let status = if search.budget.exhausted() {
        IpStatus::LimitReached
    } else if search.best.is_some() {
        IpStatus::Optimal
    } else {
        IpStatus::Infeasible
    };
    let (values, objective_value) = match search.best {
        Some((v, o)) => (Some(v), Some(o)),
        None => (None, None),
    };
    Ok(IpAssignment {
        status,
        values,
        objective_value,
        nodes: search.budget.nodes,
    })
}

struct RowState {
    sense: RowSense,
    rhs: f64,
    fixed: f64,
    /// Sum of negative coefficients over unfixed variables.
    free_min: f64,
    /// Sum of positive coefficients over unfixed variables.
    free_max: f64,
}

impl RowState {
    fn satisfiable(&self) -> bool {
        match self.sense {
            RowSense::Le => self.fixed + self.free_min <= self.rhs + EPS,
            RowSense::Ge => self.fixed + self.free_max >= self.rhs - EPS,
        }
    }
}

struct Search<'m> {
    model: &'m IpModel,
    options: BranchOptions,
    budget: Budget,
    columns: Vec<Vec<(usize, f64)>>,
    rows: Vec<RowState>,
    values: Vec<bool>,
    objective: f64,
    /// Sum of improving objective coefficients over unfixed variables.
    optimism: f64,
    best: Option<(Vec<bool>, f64)>,
}

impl<'m> Search<'m> {
    fn new(model: &'m IpModel, limits: Limits, options: BranchOptions) -> Self {
        let n = model.variables.len();
        let mut columns = vec![Vec::new(); n];
        let rows = model
            .constraints
            .iter()
            .enumerate()
            .map(|(r, c)| {
                let mut row = RowState {
                    sense: c.sense,
                    rhs: c.rhs,
                    fixed: 0.0,
                    free_min: 0.0,
                    free_max: 0.0,
                };
                for &(v, k) in &c.terms {
                    columns[v].push((r, k));
                    row.free_min += k.min(0.0);
                    row.free_max += k.max(0.0);
                }
                row
            })
            .collect();
        let optimism = model.objective.iter().map(|&c| improving(model.sense, c)).sum();
        Search {
            model,
            options,
            budget: Budget::new(limits),
            columns,
            rows,
            values: vec![false; n],
            objective: model.constant,
            optimism,
            best: None,
        }
    }

    fn beats_incumbent(&self, value: f64) -> bool {
        match (&self.best, self.model.sense) {
            (None, _) => true,
            (Some((_, b)), Sense::Maximize) => value > b + EPS,
            (Some((_, b)), Sense::Minimize) => value < b - EPS,
        }
    }

    fn bound(&self) -> f64 {
        match self.model.sense {
            Sense::Maximize => self.objective + self.optimism,
            Sense::Minimize => self.objective - self.optimism,
        }
    }

    fn descend(&mut self, var: usize) {
        if !self.budget.tick() {
            return;
        }
        if var == self.values.len() {
            let feasible = self.options.prune || self.model.is_feasible(&self.values);
            if feasible && self.beats_incumbent(self.objective) {
                self.best = Some((self.values.clone(), self.objective));
            }
            return;
        }
        let order = match self.model.sense {
            Sense::Maximize => [true, false],
            Sense::Minimize => [false, true],
        };
        for value in order {
            let ok = self.fix(var, value);
            if !self.options.prune || (ok && self.beats_incumbent(self.bound())) {
                self.descend(var + 1);
            }
            self.unfix(var, value);
            if self.budget.exhausted() {
                return;
            }
        }
    }

    /// Fixes `var`; returns false if a touched row became unsatisfiable.
    fn fix(&mut self, var: usize, value: bool) -> bool {
        let c = self.model.objective[var];
        self.optimism -= improving(self.model.sense, c);
        if value {
            self.objective += c;
        }
        self.values[var] = value;
        let mut ok = true;
        for &(r, k) in &self.columns[var] {
            let row = &mut self.rows[r];
            row.free_min -= k.min(0.0);
            row.free_max -= k.max(0.0);
            if value {
                row.fixed += k;
            }
            ok &= row.satisfiable();
        }
        ok
    }

    fn unfix(&mut self, var: usize, value: bool) {
        let c = self.model.objective[var];
        self.optimism += improving(self.model.sense, c);
        if value {
            self.objective -= c;
        }
        self.values[var] = false;
        for &(r, k) in &self.columns[var] {
            let row = &mut self.rows[r];
            row.free_min += k.min(0.0);
            row.free_max += k.max(0.0);
            if value {
                row.fixed -= k;
            }
        }
    }
}

fn improving(sense: Sense, c: f64) -> f64 {
    match sense {
        Sense::Maximize => c.max(0.0),
        Sense::Minimize => (-c).max(0.0),
    }
}

/// Restricts identifiers to `[A-Za-z0-9_]`, not starting with a digit, and
/// unique within `taken`.
fn lp_name(raw: &str, index: usize, taken: &mut BTreeSet<String>) -> String {
    let mut s: String = raw
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit()) {
        s.insert_str(0, "v_");
    }
    if taken.contains(&s) {
        s = format!("{s}_{index}");
    }
    taken.insert(s.clone());
    s
}

const TERMS_PER_LINE: usize = 8;

fn write_terms(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    let mut first = true;
    for (n, &(v, c)) in terms.iter().filter(|(_, c)| *c != 0.0).enumerate() {
        if n > 0 && n % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0.0 { "-" } else { "+" };
        let mag = c.abs();
        if first {
            if c < 0.0 {
                out.push_str(" -");
            }
        } else {
            let _ = write!(out, " {sign}");
        }
        if mag == 1.0 {
            let _ = write!(out, " {}", names[v]);
        } else {
            let _ = write!(out, " {} {}", fmt_num(mag), names[v]);
        }
        first = false;
    }
}

/// CPLEX LP text. Output depends only on the model, so identical models give
/// identical bytes.
pub fn emit_lp(model: &IpModel) -> String {
    let mut taken = BTreeSet::new();
    let names: Vec<String> = model
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| lp_name(&v.name, i, &mut taken))
        .collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ binary program: {} variables, {} constraints",
        model.variables.len(),
        model.constraints.len()
    );
    out.push_str(match model.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    let terms: Vec<(usize, f64)> = model.objective.iter().copied().enumerate().filter(|(_, c)| *c != 0.0).collect();
    write_terms(&mut out, &terms, &names);
    if model.constant != 0.0 || terms.is_empty() {
        let sign = if model.constant < 0.0 { "-" } else { "+" };
        if terms.is_empty() {
            let _ = write!(out, " {}", fmt_num(model.constant));
        } else {
            let _ = write!(out, " {sign} {}", fmt_num(model.constant.abs()));
        }
    }
    out.push('\n');

    out.push_str("Subject To\n");
    let mut labels = BTreeSet::new();
    for (i, c) in model.constraints.iter().enumerate() {
        let label = lp_name(&c.label, i, &mut labels);
        let op = match c.sense {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
        };
        let live = c.terms.iter().any(|(_, k)| *k != 0.0);
        if !live {
            let _ = writeln!(out, "\\ {label}: 0 {op} {} (no variables)", fmt_num(c.rhs));
            continue;
        }
        let _ = write!(out, " {label}:");
        write_terms(&mut out, &c.terms, &names);
        let _ = writeln!(out, " {op} {}", fmt_num(c.rhs));
    }

    out.push_str("Binary\n");
    for chunk in names.chunks(TERMS_PER_LINE) {
        let _ = writeln!(out, " {}", chunk.join(" "));
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(model: &IpModel) -> Option<f64> {
        let n = model.variables().len();
        let mut best: Option<f64> = None;
        for mask in 0u32..1 << n {
            let values: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            if !model.is_feasible(&values) {
                continue;
            }
            let v = model.evaluate(&values);
            best = Some(match (best, model.sense) {
                (None, _) => v,
                (Some(b), Sense::Maximize) => b.max(v),
                (Some(b), Sense::Minimize) => b.min(v),
            });
        }
        best
    }

    #[test]
    fn unconstrained_maximum() {
        let mut m = IpModel::new(Sense::Maximize);
        for i in 0..3 {
            m.add_variable(format!("x{i}"), None, 1.0);
        }
        let a = solve_branch_and_bound(&m, Limits::default()).unwrap();
        assert_eq!(a.status, IpStatus::Optimal);
        assert_eq!(a.objective_value, Some(3.0));
        assert_eq!(a.values, Some(vec![true; 3]));
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut m = IpModel::new(Sense::Minimize);
        let x = m.add_variable("x1", None, 1.0);
        m.add_constraint("lo", [(x, 1.0)], RowSense::Ge, 1.0);
        m.add_constraint("hi", [(x, 1.0)], RowSense::Le, 0.0);
        let a = solve_branch_and_bound(&m, Limits::default()).unwrap();
        assert_eq!(a.status, IpStatus::Infeasible);
        assert!(a.values.is_none());
    }

    #[test]
    fn small_cover_model() {
        // cover {1,2,3} with {1,2}, {2,3}, {3}
        let mut m = IpModel::new(Sense::Minimize);
        let h: Vec<_> = (0..3).map(|i| m.add_variable(format!("h{i}"), None, 1.0)).collect();
        m.add_constraint("e1", [(h[0], 1.0)], RowSense::Ge, 1.0);
        m.add_constraint("e2", [(h[0], 1.0), (h[1], 1.0)], RowSense::Ge, 1.0);
        m.add_constraint("e3", [(h[1], 1.0), (h[2], 1.0)], RowSense::Ge, 1.0);
        let a = solve_branch_and_bound(&m, Limits::default()).unwrap();
        assert_eq!(a.objective_value, Some(2.0));
        assert_eq!(a.ones(), vec![0, 2]);
    }

    #[test]
    fn node_limit_is_reported() {
        let mut m = IpModel::new(Sense::Maximize);
        for i in 0..20 {
            m.add_variable(format!("x{i}"), None, (i % 3) as f64 - 1.0);
        }
        let terms: Vec<_> = (0..20).map(|i| (i, 1.0)).collect();
        m.add_constraint("card", terms, RowSense::Le, 5.0);
        let a = solve_branch_and_bound(&m, Limits::nodes(10)).unwrap();
        assert_eq!(a.status, IpStatus::LimitReached);
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let mut m = IpModel::new(Sense::Maximize);
        m.add_variable("x", None, 1.0);
        m.add_variable("x", None, 1.0);
        assert!(matches!(solve_branch_and_bound(&m, Limits::default()), Err(IpError::DuplicateVariable(_))));
    }

    #[test]
    fn empty_model_lp_golden() {
        let m = IpModel::new(Sense::Minimize);
        let want = "\\ binary program: 0 variables, 0 constraints\nMinimize\n obj: 0\nSubject To\nBinary\nEnd\n";
        assert_eq!(emit_lp(&m), want);
    }

    #[test]
    fn lp_terms_names_and_wrapping() {
        let mut m = IpModel::new(Sense::Maximize);
        m.constant = 2.5;
        let a = m.add_variable("x[nor@(1,2)]", None, 1.0);
        let b = m.add_variable("9lives", None, -0.5);
        let c = m.add_variable("x_nor__1_2__", None, 0.0);
        m.add_constraint("link a", [(a, 1.0), (b, -1.0), (c, 3.0)], RowSense::Ge, 0.0);
        m.add_constraint("none", [], RowSense::Le, 1.0);
        let lp = emit_lp(&m);
        let want = "\\ binary program: 3 variables, 2 constraints\n\
Maximize\n obj: x_nor__1_2__ - 0.5 v_9lives + 2.5\n\
Subject To\n link_a: x_nor__1_2__ - v_9lives + 3 x_nor__1_2___2 >= 0\n\\ none: 0 <= 1 (no variables)\n\
Binary\n x_nor__1_2__ v_9lives x_nor__1_2___2\nEnd\n";
        assert_eq!(lp, want);
        assert_eq!(emit_lp(&m), lp);

        let mut wide = IpModel::new(Sense::Minimize);
        let vs: Vec<_> = (0..10).map(|i| wide.add_variable(format!("x{i}"), None, 1.0)).collect();
        wide.add_constraint("all", vs.iter().map(|&v| (v, 1.0)), RowSense::Ge, 1.0);
        let lp = emit_lp(&wide);
        assert!(lp.contains(" obj: x0 + x1 + x2 + x3 + x4 + x5 + x6 + x7\n    + x8 + x9\n"));
        assert!(lp.contains("Binary\n x0 x1 x2 x3 x4 x5 x6 x7\n x8 x9\nEnd\n"));
    }

    fn arb_model() -> impl Strategy<Value = IpModel> {
        (1usize..=10, any::<bool>()).prop_flat_map(|(n, maximize)| {
            let coef = prop::collection::vec(-3i32..=3, n);
            let rows = prop::collection::vec(
                (prop::collection::vec(-2i32..=3, n), any::<bool>(), -2i32..=4),
                0..5,
            );
            (Just(n), Just(maximize), coef, rows).prop_map(|(n, maximize, coef, rows)| {
                let mut m = IpModel::new(if maximize { Sense::Maximize } else { Sense::Minimize });
                for (i, c) in coef.iter().enumerate() {
                    m.add_variable(format!("x{i}"), None, *c as f64);
                }
                for (r, (terms, le, rhs)) in rows.into_iter().enumerate() {
                    let terms: Vec<_> = (0..n).zip(terms).filter(|(_, k)| *k != 0).map(|(v, k)| (v, k as f64)).collect();
                    let sense = if le { RowSense::Le } else { RowSense::Ge };
                    m.add_constraint(format!("r{r}"), terms, sense, rhs as f64);
                }
                m
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn matches_exhaustive_enumeration(m in arb_model()) {
            let a = solve_branch_and_bound(&m, Limits::default()).unwrap();
            let want = brute_force(&m);
            prop_assert_eq!(a.objective_value, want);
            if let Some(v) = &a.values {
                prop_assert!(m.is_feasible(v));
                prop_assert!((m.evaluate(v) - a.objective_value.unwrap()).abs() < 1e-9);
            }
        }

        #[test]
        fn pruning_keeps_the_optimum(m in arb_model()) {
            let pruned = solve_branch_and_bound(&m, Limits::default()).unwrap();
            let full = solve_branch_and_bound_with(&m, Limits::default(), BranchOptions { prune: false }).unwrap();
            prop_assert_eq!(pruned.objective_value, full.objective_value);
            prop_assert_eq!(pruned.values, full.values);
        }
    }
}
