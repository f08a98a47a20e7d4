//! Precomputed per-pair data for a [`Domain`]: effect atoms, costs, atom
//! benefits, and the integrity constraints active in `s0`.
//!
//! Every solver grounds the domain once and then works on pair indices.

use crate::domain::{action_effect_indices, ActionPoint, Domain};
use crate::state::State;

#[derive(Debug, Clone)]
pub struct Grounding {
    initial: State,
    effects: Vec<Vec<u32>>,
    costs: Vec<f64>,
    benefits: Vec<f64>,
    /// Indices into `Domain::ics` of `IC_s0`.
    active_ics: Vec<usize>,
    /// Per active constraint: sorted member pair indices.
    ic_members: Vec<Vec<usize>>,
    /// Per pair: positions into `active_ics`.
    pair_ics: Vec<Vec<usize>>,
}

impl Grounding {
    pub fn new(domain: &Domain) -> Self {
        let u = domain.universe();
        let s0 = &domain.initial;
        let mut effects = Vec::with_capacity(domain.pair_count());
        let mut costs = Vec::with_capacity(domain.pair_count());
        for pair in domain.pairs() {
            let e = action_effect_indices(&domain.actions[pair.action.0], pair.point, s0);
            effects.push(e.into_iter().map(|i| i as u32).collect());
            costs.push(domain.cost.cost_of(pair, s0));
        }
        let benefits = (0..u.atom_count())
            .map(|i| domain.benefit.benefit_of(&u.atom_at(i)))
            .collect();
        let active_ics = crate::domain::ground_ics_for_state(&domain.ics, s0);
        let mut pair_ics = vec![Vec::new(); domain.pair_count()];
        let ic_members = active_ics
            .iter()
            .enumerate()
            .map(|(pos, &ic)| {
                let members: Vec<usize> = domain.ics[ic].pairs().iter().map(|p| domain.pair_index(*p)).collect();
                for &m in &members {
                    pair_ics[m].push(pos);
                }
                members
            })
            .collect();
        Grounding {
            initial: s0.clone(),
            effects,
            costs,
            benefits,
            active_ics,
            ic_members,
            pair_ics,
        }
    }

    pub fn initial(&self) -> &State {
        &self.initial
    }

    pub fn pair_count(&self) -> usize {
        self.effects.len()
    }

    pub fn atom_count(&self) -> usize {
        self.benefits.len()
    }

    pub fn effects(&self, pair: usize) -> &[u32] {
        &self.effects[pair]
    }

    pub fn cost(&self, pair: usize) -> f64 {
        self.costs[pair]
    }

    pub fn benefit(&self, atom: usize) -> f64 {
        self.benefits[atom]
    }

    /// `|IC_s0|`.
    pub fn active_ic_count(&self) -> usize {
        self.active_ics.len()
    }

    pub fn active_ics(&self) -> &[usize] {
        &self.active_ics
    }

    pub fn ic_members(&self, active: usize) -> &[usize] {
        &self.ic_members[active]
    }

    pub fn pair_ics(&self, pair: usize) -> &[usize] {
        &self.pair_ics[pair]
    }

    pub fn total_cost(&self, pairs: &[usize]) -> f64 {
        pairs.iter().map(|&p| self.costs[p]).sum()
    }

    pub fn appl(&self, pairs: &[usize]) -> State {
        let mut s = self.initial.clone();
        for &p in pairs {
            for &a in &self.effects[p] {
                s.insert_index(a as usize);
            }
        }
        s
    }

    /// Benefit of every atom in `s`, summed in canonical order.
    pub fn state_benefit(&self, s: &State) -> f64 {
        s.indices().map(|i| self.benefits[i]).sum()
    }

    /// `f(S)`: benefit of `appl(S, s0)`.
    pub fn objective(&self, pairs: &[usize]) -> f64 {
        self.state_benefit(&self.appl(pairs))
    }

    /// Benefit newly made true by `pair` on top of `current`.
    pub fn marginal_gain(&self, pair: usize, current: &State) -> f64 {
        self.effects[pair]
            .iter()
            .filter(|&&a| !current.contains_index(a as usize))
            .map(|&a| self.benefits[a as usize])
            .sum()
    }

    /// Positions (into `active_ics`) of active constraints with two or more
    /// chosen members.
    pub fn ic_violations(&self, pairs: &[usize]) -> Vec<usize> {
        let mut counts = vec![0usize; self.active_ics.len()];
        let mut seen = pairs.to_vec();
        seen.sort_unstable();
        seen.dedup();
        for p in seen {
            for &ic in &self.pair_ics[p] {
                counts[ic] += 1;
            }
        }
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 1)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn pair_indices(domain: &Domain, pairs: &[ActionPoint]) -> Vec<usize> {
        pairs.iter().map(|p| domain.pair_index(*p)).collect()
    }
}
