//! Geospatial optimization problems: choosing action-point pairs on a
//! discrete map under cost, cardinality and integrity constraints.
//!
//! Two problem variants are covered. A goal-based instance ([`gbgop`]) asks
//! for the fewest pairs that make a set of atoms true while keeping another
//! set false. A benefit-maximizing instance ([`bmgop`]) asks for at most `k`
//! pairs maximizing the summed benefit of the resulting state. Both can be
//! solved exactly (search or integer program via [`ip`]); the benefit variant
//! also has a polynomial multiplicative-weights greedy with a proven ratio.

pub mod bench;
pub mod bmgop;
pub mod domain;
pub mod formula;
pub mod gbgop;
pub mod generate;
pub mod ground;
pub mod io;
pub mod ip;
pub mod limits;
pub mod map;
pub mod num;
pub mod reductions;
pub mod report;
pub mod state;

pub use domain::{ActionId, ActionPoint, ActionRule, BenefitModel, CostModel, Domain, IntegrityConstraint};
pub use formula::Formula;
pub use limits::Limits;
pub use map::{GridMap, Metric, Point};
pub use state::{GroundAtom, PredicateId, State, Universe};
