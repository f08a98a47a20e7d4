//! Actions, cost and benefit models, integrity constraints, and the shared
//! [`Domain`] that both problem variants are built on.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::formula::{Binding, Formula, Term};
use crate::map::{GridMap, Metric, Point};
use crate::state::{GroundAtom, PredicateId, State, Universe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub usize);

/// An action placed at a point: the unit of decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionPoint {
    pub action: ActionId,
    pub point: Point,
}

impl ActionPoint {
    pub const fn new(action: ActionId, point: Point) -> Self {
        ActionPoint { action, point }
    }
}

/// `effect(p')` for every `p'` with `source_guard(p)`, `target_guard(p')` and
/// `dist(p, p') <= max_distance` (unbounded when `None`).
#[derive(Debug, Clone, PartialEq)]
pub struct RuleEffect {
    pub effect: PredicateId,
    pub source_guard: Formula,
    pub target_guard: Formula,
    pub max_distance: Option<f64>,
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EffectKind {
    Rule(RuleEffect),
    /// Effect table; points not listed have no effect.
    Explicit(BTreeMap<Point, Vec<GroundAtom>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionRule {
    pub name: String,
    pub kind: EffectKind,
}

impl ActionRule {
    pub fn rule(name: impl Into<String>, effect: RuleEffect) -> Self {
        ActionRule {
            name: name.into(),
            kind: EffectKind::Rule(effect),
        }
    }

    pub fn explicit(name: impl Into<String>, table: BTreeMap<Point, Vec<GroundAtom>>) -> Self {
        ActionRule {
            name: name.into(),
            kind: EffectKind::Explicit(table),
        }
    }
}

/// Effect atoms of `rule` placed at `p`, evaluated against the initial state
/// and returned as sorted canonical atom indices.
pub fn action_effect_indices(rule: &ActionRule, p: Point, s0: &State) -> Vec<usize> {
    let u = s0.universe();
    match &rule.kind {
        EffectKind::Explicit(table) => {
            let mut out: Vec<usize> = table
                .get(&p)
                .into_iter()
                .flatten()
                .filter(|a| u.contains(a))
                .map(|a| u.atom_index(a))
                .collect();
            out.sort_unstable();
            out.dedup();
            out
        }
        EffectKind::Rule(r) => {
            if !r.source_guard.eval(s0, Binding::placement(p)) {
                return Vec::new();
            }
            let candidates: Vec<Point> = match r.max_distance {
                Some(d) => u.map.ball(p, d, r.metric),
                None => u.map.points().collect(),
            };
            candidates
                .into_iter()
                .filter(|&q| r.target_guard.eval(s0, Binding::pair(p, q)))
                .map(|q| u.atom_index(&GroundAtom::new(r.effect, q)))
                .collect()
        }
    }
}

pub fn action_effects(rule: &ActionRule, p: Point, s0: &State) -> Vec<GroundAtom> {
    let u = s0.universe();
    action_effect_indices(rule, p, s0)
        .into_iter()
        .map(|i| u.atom_at(i))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostRule {
    /// Template over the placement point.
    pub when: Formula,
    pub cost: f64,
}

/// Overrides win over rules, the first matching rule wins over the default.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    pub default_cost: f64,
    pub rules: Vec<CostRule>,
    pub overrides: BTreeMap<ActionPoint, f64>,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            default_cost: 1.0,
            rules: Vec::new(),
            overrides: BTreeMap::new(),
        }
    }
}

impl CostModel {
    pub fn uniform(cost: f64) -> Self {
        CostModel {
            default_cost: cost,
            ..CostModel::default()
        }
    }

    pub fn cost_of(&self, pair: ActionPoint, s0: &State) -> f64 {
        if let Some(&c) = self.overrides.get(&pair) {
            return c;
        }
        self.rules
            .iter()
            .find(|r| r.when.eval(s0, Binding::placement(pair.point)))
            .map_or(self.default_cost, |r| r.cost)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenefitModel {
    pub per_predicate: BTreeMap<PredicateId, f64>,
    pub overrides: BTreeMap<GroundAtom, f64>,
}

impl BenefitModel {
    pub fn benefit_of(&self, atom: &GroundAtom) -> f64 {
        self.overrides
            .get(atom)
            .or_else(|| self.per_predicate.get(&atom.predicate))
            .copied()
            .unwrap_or(0.0)
    }
}

/// `pairs <- condition`: while `condition` holds, at most one member of
/// `pairs` may be executed.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrityConstraint {
    pairs: Vec<ActionPoint>,
    pub condition: Formula,
}

impl IntegrityConstraint {
    pub fn new(pairs: impl IntoIterator<Item = ActionPoint>, condition: Formula) -> Self {
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        pairs.sort_unstable();
        pairs.dedup();
        IntegrityConstraint { pairs, condition }
    }

    /// Sorted, duplicate-free.
    pub fn pairs(&self) -> &[ActionPoint] {
        &self.pairs
    }

    pub fn contains(&self, pair: &ActionPoint) -> bool {
        self.pairs.binary_search(pair).is_ok()
    }
}

/// `IC_s`: indices of the constraints whose condition holds in `s`, in input order.
pub fn ground_ics_for_state(ics: &[IntegrityConstraint], s: &State) -> Vec<usize> {
    ics.iter()
        .enumerate()
        .filter(|(_, ic)| ic.condition.eval(s, Binding::default()))
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IcCheck {
    /// Indices into the constraint list.
    pub violated: Vec<usize>,
}

impl IcCheck {
    pub fn is_satisfied(&self) -> bool {
        self.violated.is_empty()
    }
}

pub fn check_ics(s: &State, sol: &[ActionPoint], ics: &[IntegrityConstraint]) -> IcCheck {
    let violated = ground_ics_for_state(ics, s)
        .into_iter()
        .filter(|&i| {
            let mut chosen: Vec<_> = sol.iter().filter(|p| ics[i].contains(p)).collect();
            chosen.sort_unstable();
            chosen.dedup();
            chosen.len() > 1
        })
        .collect();
    IcCheck { violated }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },
    #[error("{context}: point {point} lies outside the map")]
    OutOfBounds { context: String, point: Point },
    #[error("{context}: unknown {kind} `{name}`")]
    Unknown {
        context: String,
        kind: &'static str,
        name: String,
    },
    #[error("{context}: cost {value} is outside [0, 1]")]
    CostOutOfRange { context: String, value: f64 },
    #[error("{context}: benefit {value} is negative or not finite")]
    BenefitOutOfRange { context: String, value: f64 },
    #[error("integrity constraint #{index} has no action-point pairs")]
    EmptyConstraint { index: usize },
    #[error("{context}: formula must be ground")]
    NonGround { context: String },
    #[error("{context}: formula may not refer to p'")]
    TargetInPlacementTemplate { context: String },
    #[error("action `{action}`: max_distance {value} must be a non-negative finite number")]
    BadDistance { action: String, value: f64 },
    #[error("goal sets overlap on {count} atom(s), e.g. {example}")]
    GoalsOverlap { count: usize, example: String },
    #[error("problem parameter {name} = {value} is invalid: {reason}")]
    BadParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

impl ModelError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::DuplicateName { .. } => "E_DUPLICATE_NAME",
            ModelError::OutOfBounds { .. } => "E_OUT_OF_BOUNDS",
            ModelError::Unknown { .. } => "E_UNKNOWN_NAME",
            ModelError::CostOutOfRange { .. } => "E_COST_RANGE",
            ModelError::BenefitOutOfRange { .. } => "E_BENEFIT_RANGE",
            ModelError::EmptyConstraint { .. } => "E_EMPTY_CONSTRAINT",
            ModelError::NonGround { .. } => "E_NON_GROUND",
            ModelError::TargetInPlacementTemplate { .. } => "E_TEMPLATE_VARIABLE",
            ModelError::BadDistance { .. } => "E_DISTANCE",
            ModelError::GoalsOverlap { .. } => "E_GOALS_NOT_DISJOINT",
            ModelError::BadParameter { .. } => "E_PROBLEM_PARAMETER",
        }
    }
}

/// Everything both problem variants share: `M`, `G`, `s0`, `A`, `C`, `B`, `IC`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub map: GridMap,
    pub predicates: Vec<String>,
    pub initial: State,
    pub actions: Vec<ActionRule>,
    pub cost: CostModel,
    pub benefit: BenefitModel,
    pub ics: Vec<IntegrityConstraint>,
}

impl Domain {
    /// A domain with no actions, no constraints, and an empty initial state.
    pub fn new(map: GridMap, predicates: Vec<String>) -> Self {
        let initial = Universe::new(map, predicates.len()).empty_state();
        Domain {
            map,
            predicates,
            initial,
            actions: Vec::new(),
            cost: CostModel::default(),
            benefit: BenefitModel::default(),
            ics: Vec::new(),
        }
    }

    pub fn universe(&self) -> Universe {
        Universe::new(self.map, self.predicates.len())
    }

    pub fn predicate_id(&self, name: &str) -> Option<PredicateId> {
        self.predicates.iter().position(|p| p == name).map(PredicateId)
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a.name == name).map(ActionId)
    }

    pub fn pair_count(&self) -> usize {
        self.actions.len() * self.map.point_count()
    }

    /// Canonical pair index: action major, x-major point minor.
    pub fn pair_index(&self, pair: ActionPoint) -> usize {
        pair.action.0 * self.map.point_count() + self.map.point_index(pair.point)
    }

    pub fn pair_at(&self, index: usize) -> ActionPoint {
        let per = self.map.point_count();
        ActionPoint::new(ActionId(index / per), self.map.point_at(index % per))
    }

    pub fn pairs(&self) -> impl Iterator<Item = ActionPoint> + '_ {
        (0..self.pair_count()).map(move |i| self.pair_at(i))
    }

    pub fn effects(&self, pair: ActionPoint) -> Vec<GroundAtom> {
        action_effects(&self.actions[pair.action.0], pair.point, &self.initial)
    }

    /// `appl(sol, s)`: `s` together with every effect of `sol`. Effects are
    /// evaluated against the domain's initial state.
    pub fn appl(&self, sol: &[ActionPoint], s: &State) -> State {
        let mut out = s.clone();
        for &pair in sol {
            for i in action_effect_indices(&self.actions[pair.action.0], pair.point, &self.initial) {
                out.insert_index(i);
            }
        }
        out
    }

    pub fn cost_of(&self, pair: ActionPoint) -> f64 {
        self.cost.cost_of(pair, &self.initial)
    }

    pub fn benefit_of(&self, atom: &GroundAtom) -> f64 {
        self.benefit.benefit_of(atom)
    }

    pub fn check_ics(&self, sol: &[ActionPoint]) -> IcCheck {
        check_ics(&self.initial, sol, &self.ics)
    }

    pub fn atom_name(&self, atom: &GroundAtom) -> String {
        let pred = self.predicates.get(atom.predicate.0).map_or("?", String::as_str);
        format!("{pred}{}", atom.point)
    }

    pub fn pair_name(&self, pair: ActionPoint) -> String {
        let name = self.actions.get(pair.action.0).map_or("?", |a| a.name.as_str());
        format!("{name}@{}", pair.point)
    }

    /// Structural checks: names, bounds, cost range, benefit sign, ground
    /// constraint conditions.
    pub fn validate(&self) -> Result<(), ModelError> {
        let u = self.universe();
        check_unique("predicate", self.predicates.iter().map(String::as_str))?;
        check_unique("action", self.actions.iter().map(|a| a.name.as_str()))?;
        if self.initial.universe() != u {
            return Err(ModelError::Unknown {
                context: "initial state".into(),
                kind: "universe",
                name: "mismatched map or predicate set".into(),
            });
        }

        for action in &self.actions {
            let ctx = format!("action `{}`", action.name);
            match &action.kind {
                EffectKind::Rule(r) => {
                    self.check_predicate(&ctx, r.effect)?;
                    self.check_formula(&format!("{ctx} source_guard"), &r.source_guard)?;
                    self.check_formula(&format!("{ctx} target_guard"), &r.target_guard)?;
                    if r.source_guard.mentions_target() {
                        return Err(ModelError::TargetInPlacementTemplate {
                            context: format!("{ctx} source_guard"),
                        });
                    }
                    if let Some(d) = r.max_distance {
                        if !(d.is_finite() && d >= 0.0) {
                            return Err(ModelError::BadDistance {
                                action: action.name.clone(),
                                value: d,
                            });
                        }
                    }
                }
                EffectKind::Explicit(table) => {
                    for (p, atoms) in table {
                        self.check_point(&ctx, *p)?;
                        for a in atoms {
                            self.check_atom(&ctx, a)?;
                        }
                    }
                }
            }
        }

        check_cost(&self.cost.default_cost, "default cost")?;
        for (i, rule) in self.cost.rules.iter().enumerate() {
            let ctx = format!("cost rule #{i}");
            self.check_formula(&ctx, &rule.when)?;
            if rule.when.mentions_target() {
                return Err(ModelError::TargetInPlacementTemplate { context: ctx });
            }
            check_cost(&rule.cost, &ctx)?;
        }
        for (pair, c) in &self.cost.overrides {
            let ctx = "cost override".to_string();
            self.check_pair(&ctx, *pair)?;
            check_cost(c, &ctx)?;
        }

        for (pred, b) in &self.benefit.per_predicate {
            self.check_predicate("benefit", *pred)?;
            check_benefit(*b, "benefit")?;
        }
        for (atom, b) in &self.benefit.overrides {
            self.check_atom("benefit override", atom)?;
            check_benefit(*b, "benefit override")?;
        }

        for (i, ic) in self.ics.iter().enumerate() {
            let ctx = format!("integrity constraint #{i}");
            if ic.pairs.is_empty() {
                return Err(ModelError::EmptyConstraint { index: i });
            }
            for pair in &ic.pairs {
                self.check_pair(&ctx, *pair)?;
            }
            self.check_formula(&ctx, &ic.condition)?;
            if !ic.condition.is_ground() {
                return Err(ModelError::NonGround { context: ctx });
            }
        }
        Ok(())
    }

    fn check_point(&self, ctx: &str, p: Point) -> Result<(), ModelError> {
        if self.map.contains(p) {
            Ok(())
        } else {
            Err(ModelError::OutOfBounds {
                context: ctx.to_string(),
                point: p,
            })
        }
    }

    fn check_predicate(&self, ctx: &str, pred: PredicateId) -> Result<(), ModelError> {
        if pred.0 < self.predicates.len() {
            Ok(())
        } else {
            Err(ModelError::Unknown {
                context: ctx.to_string(),
                kind: "predicate",
                name: format!("#{}", pred.0),
            })
        }
    }

    pub(crate) fn check_atom(&self, ctx: &str, atom: &GroundAtom) -> Result<(), ModelError> {
        self.check_predicate(ctx, atom.predicate)?;
        self.check_point(ctx, atom.point)
    }

    fn check_pair(&self, ctx: &str, pair: ActionPoint) -> Result<(), ModelError> {
        if pair.action.0 >= self.actions.len() {
            return Err(ModelError::Unknown {
                context: ctx.to_string(),
                kind: "action",
                name: format!("#{}", pair.action.0),
            });
        }
        self.check_point(ctx, pair.point)
    }

    fn check_formula(&self, ctx: &str, f: &Formula) -> Result<(), ModelError> {
        for t in f.terms() {
            self.check_predicate(ctx, t.predicate)?;
            if let Term::Point(p) = t.term {
                self.check_point(ctx, p)?;
            }
        }
        Ok(())
    }
}

fn check_unique<'a>(kind: &'static str, names: impl Iterator<Item = &'a str>) -> Result<(), ModelError> {
    let mut seen = std::collections::BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(ModelError::DuplicateName {
                kind,
                name: n.to_string(),
            });
        }
    }
    Ok(())
}

fn check_cost(c: &f64, ctx: &str) -> Result<(), ModelError> {
    if (0.0..=1.0).contains(c) {
        Ok(())
    } else {
        Err(ModelError::CostOutOfRange {
            context: ctx.to_string(),
            value: *c,
        })
    }
}

fn check_benefit(b: f64, ctx: &str) -> Result<(), ModelError> {
    if b.is_finite() && b >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::BenefitOutOfRange {
            context: ctx.to_string(),
            value: b,
        })
    }
}

impl fmt::Display for ActionPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}@{}", self.action.0, self.point)
    }
}
