//! Encoders from classical covering and satisfiability problems into
//! single-point instances. Elements (or clauses) become predicates and
//! families (or literals) become actions, both in input order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bmgop::BmgopInstance;
use crate::domain::{ActionRule, BenefitModel, CostModel, Domain, ModelError};
use crate::gbgop::GbgopInstance;
use crate::map::{GridMap, Point};
use crate::state::{enumerate_ground_atoms, GroundAtom, PredicateId};

const ORIGIN: Point = Point::new(0, 0);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverProblem {
    pub universe: Vec<u32>,
    pub families: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotoneCnf {
    /// Number of propositional atoms `x0 .. x{n-1}`.
    pub atoms: usize,
    /// Each clause is a disjunction of atom indices.
    pub clauses: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("the element universe is empty")]
    EmptyUniverse,
    #[error("element {0} is listed twice in the universe")]
    DuplicateElement(u32),
    #[error("family #{family} contains element {element}, which is not in the universe")]
    ElementOutside { family: usize, element: u32 },
    #[error("k must be given for max-k-cover")]
    MissingK,
    #[error("set cover takes no k")]
    UnexpectedK,
    #[error("k = {k} must be at least 1 and at most the number of families ({families})")]
    BadK { k: usize, families: usize },
    #[error("clause #{0} is empty")]
    EmptyClause(usize),
    #[error("clause #{clause} refers to atom {atom}, but there are only {atoms}")]
    UnknownAtom { clause: usize, atom: usize, atoms: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl ReductionError {
    pub fn code(&self) -> &'static str {
        match self {
            ReductionError::Model(e) => e.code(),
            _ => "E_ENCODING",
        }
    }
}

impl CoverProblem {
    fn validate(&self) -> Result<BTreeMap<u32, usize>, ReductionError> {
        if self.universe.is_empty() {
            return Err(ReductionError::EmptyUniverse);
        }
        let mut position = BTreeMap::new();
        for (i, &e) in self.universe.iter().enumerate() {
            if position.insert(e, i).is_some() {
                return Err(ReductionError::DuplicateElement(e));
            }
        }
        for (family, h) in self.families.iter().enumerate() {
            if let Some(&element) = h.iter().find(|e| !position.contains_key(e)) {
                return Err(ReductionError::ElementOutside { family, element });
            }
        }
        if let Some(k) = self.k {
            if k == 0 || k > self.families.len() {
                return Err(ReductionError::BadK {
                    k,
                    families: self.families.len(),
                });
            }
        }
        Ok(position)
    }

    /// One point, predicate `e{id}` per element, action `h{i}` per family.
    fn domain(&self) -> Result<Domain, ReductionError> {
        let position = self.validate()?;
        let predicates = self.universe.iter().map(|e| format!("e{e}")).collect();
        let mut d = Domain::new(GridMap::new(0, 0), predicates);
        for (i, h) in self.families.iter().enumerate() {
            let atoms = h.iter().map(|e| GroundAtom::new(PredicateId(position[e]), ORIGIN)).collect();
            d.actions.push(ActionRule::explicit(format!("h{i}"), BTreeMap::from([(ORIGIN, atoms)])));
        }
        d.cost = CostModel::uniform(1.0);
        Ok(d)
    }
}

/// Minimum set cover as a goal-based instance: unit costs, budget `n`, every
/// element atom required.
pub fn encode_set_cover(p: &CoverProblem) -> Result<GbgopInstance, ReductionError> {
    if p.k.is_some() {
        return Err(ReductionError::UnexpectedK);
    }
    let d = p.domain()?;
    let all = enumerate_ground_atoms(d.map, d.predicates.len());
    Ok(GbgopInstance::new(d, p.universe.len() as f64, all, Vec::new())?)
}

/// Maximum coverage with `k` families as a benefit-maximizing instance:
/// unit costs and benefits, `k = c = K`.
pub fn encode_max_k_cover(p: &CoverProblem) -> Result<BmgopInstance, ReductionError> {
    let k = p.k.ok_or(ReductionError::MissingK)?;
    let mut d = p.domain()?;
    d.benefit = BenefitModel {
        per_predicate: (0..d.predicates.len()).map(|i| (PredicateId(i), 1.0)).collect(),
        overrides: BTreeMap::new(),
    };
    Ok(BmgopInstance::new(d, k, k as f64)?)
}

/// Monotone CNF satisfiability: predicate `c{j}` per clause, action `x{i}`
/// per atom making true every clause that mentions it. Solutions are exactly
/// the satisfying assignments.
pub fn encode_monsat(p: &MonotoneCnf) -> Result<GbgopInstance, ReductionError> {
    for (clause, c) in p.clauses.iter().enumerate() {
        if c.is_empty() {
            return Err(ReductionError::EmptyClause(clause));
        }
        if let Some(&atom) = c.iter().find(|&&a| a >= p.atoms) {
            return Err(ReductionError::UnknownAtom {
                clause,
                atom,
                atoms: p.atoms,
            });
        }
    }
    let predicates = (0..p.clauses.len()).map(|j| format!("c{j}")).collect();
    let mut d = Domain::new(GridMap::new(0, 0), predicates);
    for i in 0..p.atoms {
        let atoms = (0..p.clauses.len())
            .filter(|&j| p.clauses[j].contains(&i))
            .map(|j| GroundAtom::new(PredicateId(j), ORIGIN))
            .collect();
        d.actions.push(ActionRule::explicit(format!("x{i}"), BTreeMap::from([(ORIGIN, atoms)])));
    }
    d.cost = CostModel::uniform(1.0);
    let all = enumerate_ground_atoms(d.map, d.predicates.len());
    Ok(GbgopInstance::new(d, p.atoms as f64, all, Vec::new())?)
}
