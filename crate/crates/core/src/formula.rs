//! Well-formed formulas over ground atoms.
//!
//! Atoms name either a fixed point or one of two implicit variables: the
//! placement point `p` of an action and the affected point `p'`. Only action
//! guards and cost rules may use the variables; integrity-constraint
//! conditions must be ground.

use crate::map::Point;
use crate::state::{GroundAtom, PredicateId, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Term {
    Point(Point),
    /// `p`, where the action is placed.
    Placement,
    /// `p'`, the point receiving the effect.
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AtomTerm {
    pub predicate: PredicateId,
    pub term: Term,
}

impl AtomTerm {
    pub fn ground(predicate: PredicateId, point: Point) -> Self {
        AtomTerm {
            predicate,
            term: Term::Point(point),
        }
    }

    pub fn at_placement(predicate: PredicateId) -> Self {
        AtomTerm {
            predicate,
            term: Term::Placement,
        }
    }

    pub fn at_target(predicate: PredicateId) -> Self {
        AtomTerm {
            predicate,
            term: Term::Target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    Atom(AtomTerm),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
}

/// Values for the implicit variables while evaluating a template.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Binding {
    pub placement: Option<Point>,
    pub target: Option<Point>,
}

impl Binding {
    pub fn placement(p: Point) -> Self {
        Binding {
            placement: Some(p),
            target: None,
        }
    }

    pub fn pair(p: Point, target: Point) -> Self {
        Binding {
            placement: Some(p),
            target: Some(target),
        }
    }
}

impl Formula {
    pub fn atom(atom: GroundAtom) -> Self {
        Formula::Atom(AtomTerm::ground(atom.predicate, atom.point))
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    /// Evaluates under `binding`. An atom over an unbound variable is false.
    pub fn eval(&self, state: &State, binding: Binding) -> bool {
        match self {
            Formula::True => true,
            Formula::Atom(a) => {
                let point = match a.term {
                    Term::Point(p) => Some(p),
                    Term::Placement => binding.placement,
                    Term::Target => binding.target,
                };
                point.is_some_and(|p| state.contains(&GroundAtom::new(a.predicate, p)))
            }
            Formula::And(fs) => fs.iter().all(|f| f.eval(state, binding)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(state, binding)),
            Formula::Not(f) => !f.eval(state, binding),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.terms().all(|t| matches!(t.term, Term::Point(_)))
    }

    pub fn mentions_target(&self) -> bool {
        self.terms().any(|t| t.term == Term::Target)
    }

    /// All atom terms, depth first.
    pub fn terms(&self) -> impl Iterator<Item = &AtomTerm> {
        let mut stack = vec![self];
        let mut out = Vec::new();
        while let Some(f) = stack.pop() {
            match f {
                Formula::True => {}
                Formula::Atom(a) => out.push(a),
                Formula::And(fs) | Formula::Or(fs) => stack.extend(fs.iter().rev()),
                Formula::Not(f) => stack.push(f),
            }
        }
        out.into_iter()
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::Atom(_) => 1,
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::depth).max().unwrap_or(0),
            Formula::Not(f) => 1 + f.depth(),
        }
    }
}

/// `s |= f` for a ground formula.
pub fn satisfies(state: &State, formula: &Formula) -> bool {
    formula.eval(state, Binding::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::GridMap;
    use crate::state::Universe;
    use proptest::prelude::*;

    fn universe() -> Universe {
        // 10 atoms: 2 predicates over a 5-point line
        Universe::new(GridMap::new(4, 0), 2)
    }

    #[test]
    fn atom_membership() {
        let u = Universe::new(GridMap::new(16, 10), 6);
        let hi_cost = GroundAtom::new(PredicateId(0), Point::new(1, 9));
        let s = State::from_atoms(u, [&hi_cost]);
        assert!(satisfies(&s, &Formula::atom(hi_cost)));
        let exposure_elsewhere = GroundAtom::new(PredicateId(0), Point::new(1, 8));
        assert!(!satisfies(&s, &Formula::atom(exposure_elsewhere)));
    }

    #[test]
    fn empty_state_negation() {
        let u = universe();
        let a = u.atom_at(3);
        assert!(satisfies(&u.empty_state(), &Formula::not(Formula::atom(a))));
        assert!(satisfies(&u.empty_state(), &Formula::True));
    }

    #[test]
    fn template_binding() {
        let u = universe();
        let s = State::from_indices(u, [2]);
        let f = Formula::Atom(AtomTerm::at_placement(PredicateId(0)));
        assert!(f.eval(&s, Binding::placement(Point::new(2, 0))));
        assert!(!f.eval(&s, Binding::placement(Point::new(1, 0))));
        assert!(!f.eval(&s, Binding::default()));
        assert!(!f.is_ground());
    }

    /// Independent oracle: compile the formula to a truth table over the ten
    /// atoms, then look the state's row up.
    fn truth_table(f: &Formula, u: Universe) -> Vec<bool> {
        fn row(f: &Formula, u: Universe, mask: u32) -> bool {
            match f {
                Formula::True => true,
                Formula::Atom(a) => match a.term {
                    Term::Point(p) => mask >> u.atom_index(&GroundAtom::new(a.predicate, p)) & 1 == 1,
                    _ => false,
                },
                Formula::And(fs) => {
                    let mut acc = true;
                    for g in fs {
                        acc &= row(g, u, mask);
                    }
                    acc
                }
                Formula::Or(fs) => {
                    let mut acc = false;
                    for g in fs {
                        acc |= row(g, u, mask);
                    }
                    acc
                }
                Formula::Not(g) => !row(g, u, mask),
            }
        }
        (0..1u32 << u.atom_count()).map(|m| row(f, u, m)).collect()
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let u = universe();
        let leaf = prop_oneof![
            1 => Just(Formula::True),
            4 => (0..u.atom_count()).prop_map(move |i| Formula::atom(u.atom_at(i))),
        ];
        leaf.prop_recursive(3, 24, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 1..4).prop_map(Formula::And),
                prop::collection::vec(inner.clone(), 1..4).prop_map(Formula::Or),
                inner.prop_map(Formula::not),
            ]
        })
    }

    proptest! {
        #[test]
        fn agrees_with_truth_table(f in arb_formula(), mask in 0u32..1024) {
            prop_assume!(f.depth() <= 4);
            let u = universe();
            let s = State::from_indices(u, (0..10).filter(|i| mask >> i & 1 == 1));
            let table = truth_table(&f, u);
            prop_assert_eq!(satisfies(&s, &f), table[mask as usize]);
        }
    }
}
