//! Ground atoms and states.
//!
//! A ground atom `g(p)` is indexed as `predicate * |M| + point_index(p)`, so
//! atom sets are bitmaps over `0..|G|*|M|` and iteration is canonical
//! (predicate major, then x-major point order).

use std::fmt;

use fixedbitset::FixedBitSet;

use crate::map::{GridMap, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub predicate: PredicateId,
    pub point: Point,
}

impl GroundAtom {
    pub const fn new(predicate: PredicateId, point: Point) -> Self {
        GroundAtom { predicate, point }
    }
}

/// The atom universe `B_L` for a map and a predicate count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Universe {
    pub map: GridMap,
    pub predicates: usize,
}

impl Universe {
    pub fn new(map: GridMap, predicates: usize) -> Self {
        Universe { map, predicates }
    }

    pub fn atom_count(&self) -> usize {
        self.predicates * self.map.point_count()
    }

    pub fn contains(&self, atom: &GroundAtom) -> bool {
        atom.predicate.0 < self.predicates && self.map.contains(atom.point)
    }

    pub fn atom_index(&self, atom: &GroundAtom) -> usize {
        atom.predicate.0 * self.map.point_count() + self.map.point_index(atom.point)
    }

    pub fn atom_at(&self, index: usize) -> GroundAtom {
        let per = self.map.point_count();
        GroundAtom::new(PredicateId(index / per), self.map.point_at(index % per))
    }

    pub fn empty_state(&self) -> State {
        State {
            universe: *self,
            bits: FixedBitSet::with_capacity(self.atom_count()),
        }
    }
}

/// `B_L` in canonical order.
pub fn enumerate_ground_atoms(map: GridMap, predicate_count: usize) -> Vec<GroundAtom> {
    let u = Universe::new(map, predicate_count);
    (0..u.atom_count()).map(|i| u.atom_at(i)).collect()
}

/// A set of ground atoms, stored as a bitmap over canonical atom indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct State {
    universe: Universe,
    bits: FixedBitSet,
}

impl State {
    pub fn from_atoms<'a>(universe: Universe, atoms: impl IntoIterator<Item = &'a GroundAtom>) -> Self {
        let mut s = universe.empty_state();
        for a in atoms {
            s.insert(a);
        }
        s
    }

    pub fn from_indices(universe: Universe, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = universe.empty_state();
        for i in indices {
            s.bits.insert(i);
        }
        s
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn insert(&mut self, atom: &GroundAtom) {
        let i = self.universe.atom_index(atom);
        self.bits.insert(i);
    }

    pub fn insert_index(&mut self, index: usize) {
        self.bits.insert(index);
    }

    /// Membership; atoms outside the universe are never members.
    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.universe.contains(atom) && self.bits.contains(self.universe.atom_index(atom))
    }

    pub fn contains_index(&self, index: usize) -> bool {
        self.bits.contains(index)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn atoms(&self) -> impl Iterator<Item = GroundAtom> + '_ {
        self.bits.ones().map(|i| self.universe.atom_at(i))
    }

    pub fn union_with(&mut self, other: &State) {
        self.bits.union_with(&other.bits);
    }

    pub fn is_subset(&self, other: &State) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &State) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn intersection(&self, other: &State) -> State {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        State {
            universe: self.universe,
            bits,
        }
    }

    pub fn difference(&self, other: &State) -> State {
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        State {
            universe: self.universe,
            bits,
        }
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.indices()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_single_predicate() {
        let atoms = enumerate_ground_atoms(GridMap::new(1, 1), 1);
        let pts: Vec<_> = atoms.iter().map(|a| (a.point.x, a.point.y)).collect();
        assert_eq!(pts, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
    }

    #[test]
    fn line_map_two_predicates() {
        let atoms = enumerate_ground_atoms(GridMap::new(2, 0), 2);
        assert_eq!(atoms.len(), 6);
        // brute force: every (pred, x) combination exactly once
        for g in 0..2 {
            for x in 0..3 {
                let a = GroundAtom::new(PredicateId(g), Point::new(x, 0));
                assert_eq!(atoms.iter().filter(|b| **b == a).count(), 1);
            }
        }
    }

    #[test]
    fn campaign_sized_universe() {
        // 17 x 11 lattice with seven predicates
        assert_eq!(enumerate_ground_atoms(GridMap::new(16, 10), 7).len(), 1309);
    }

    #[test]
    fn index_round_trip_and_set_ops() {
        let u = Universe::new(GridMap::new(3, 4), 3);
        for i in 0..u.atom_count() {
            assert_eq!(u.atom_index(&u.atom_at(i)), i);
        }
        let a = State::from_indices(u, [1, 2, 3]);
        let b = State::from_indices(u, [3, 4]);
        assert_eq!(a.intersection(&b).indices().collect::<Vec<_>>(), vec![3]);
        assert_eq!(a.difference(&b).len(), 2);
        assert!(!a.contains(&GroundAtom::new(PredicateId(7), Point::new(0, 0))));
    }
}
