//! Scenario generators: the fixed campaign district and seeded random
//! instances.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bmgop::BmgopInstance;
use crate::domain::{
    ActionId, ActionPoint, ActionRule, BenefitModel, CostModel, CostRule, Domain, IntegrityConstraint, RuleEffect,
};
use crate::formula::{AtomTerm, Formula};
use crate::gbgop::GbgopInstance;
use crate::io::Instance;
use crate::map::{GridMap, Metric, Point};
use crate::state::{GroundAtom, PredicateId, State};

/// Largest atom or pair count [`gen_random`] will build.
pub const MAX_GENERATED: usize = 50_000;

/// Predicates of the campaign district, in declaration order.
pub const CAMPAIGN_PREDICATES: [&str; 7] = ["hi_cost", "non_pop", "grp1", "grp2", "hq1", "hq2", "exposure"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignParams {
    pub k: usize,
    /// Budget of the benefit-maximizing variant.
    pub bmgop_budget: f64,
    /// Budget of the goal-based variant.
    pub gbgop_budget: f64,
}

impl Default for CampaignParams {
    fn default() -> Self {
        CampaignParams {
            k: 3,
            bmgop_budget: 2.0,
            gbgop_budget: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub gbgop: GbgopInstance,
    pub bmgop: BmgopInstance,
}

fn cells(xs: std::ops::RangeInclusive<u32>, ys: std::ops::RangeInclusive<u32>) -> Vec<Point> {
    xs.flat_map(|x| ys.clone().map(move |y| Point::new(x, y))).collect()
}

fn hq(i: usize) -> Point {
    [Point::new(4, 3), Point::new(10, 7)][i]
}

fn non_pop_cells() -> Vec<Point> {
    let mut v = cells(8..=8, 0..=10);
    v.extend(cells(12..=12, 0..=10));
    v.extend(cells(0..=7, 7..=7));
    v.extend(
        [(10, 1), (10, 4), (10, 10), (9, 7), (13, 6), (13, 9), (14, 2), (14, 4), (1, 10), (2, 10), (6, 10), (7, 10)]
            .map(|(x, y)| Point::new(x, y)),
    );
    v
}

fn rect1() -> Vec<Point> {
    cells(4..=6, 1..=5)
}

fn rect2() -> Vec<Point> {
    cells(9..=11, 5..=9)
}

/// The campaign district on the 17 x 11 lattice (187 points): two voter
/// groups with headquarters, unpopulated strips, and an expensive corner.
/// `nor` rallies expose every populated point within one step (king moves);
/// `appeal_i` at group `i`'s headquarters exposes the whole group. At most
/// one of the two appeals may be made.
pub fn campaign_domain() -> Domain {
    let map = GridMap::new(16, 10);
    let mut d = Domain::new(map, CAMPAIGN_PREDICATES.iter().map(|s| s.to_string()).collect());
    let id = |name: &str| PredicateId(CAMPAIGN_PREDICATES.iter().position(|p| *p == name).unwrap());
    let (hi_cost, non_pop, grp1, grp2, hq1, hq2, exposure) =
        (id("hi_cost"), id("non_pop"), id("grp1"), id("grp2"), id("hq1"), id("hq2"), id("exposure"));

    let mut atoms = Vec::new();
    let mut place = |pred: PredicateId, pts: &[Point]| atoms.extend(pts.iter().map(|&p| GroundAtom::new(pred, p)));
    place(non_pop, &non_pop_cells());
    let mut hi = cells(0..=2, 8..=10);
    hi.push(Point::new(4, 9));
    place(hi_cost, &hi);
    let mut g1 = rect1();
    g1.extend(cells(2..=3, 1..=5));
    g1.extend([Point::new(4, 0), Point::new(5, 0)]);
    place(grp1, &g1);
    let mut g2 = cells(2..=7, 8..=9);
    g2.push(Point::new(5, 10));
    place(grp2, &g2);
    place(hq1, &[hq(0)]);
    place(hq2, &[hq(1)]);
    d.initial = State::from_atoms(d.universe(), &atoms);

    d.actions.push(ActionRule::rule(
        "nor",
        RuleEffect {
            effect: exposure,
            source_guard: Formula::True,
            target_guard: Formula::not(Formula::Atom(AtomTerm::at_target(non_pop))),
            max_distance: Some(1.0),
            metric: Metric::Chebyshev,
        },
    ));
    for (name, hq_pred, grp) in [("appeal1", hq1, grp1), ("appeal2", hq2, grp2)] {
        d.actions.push(ActionRule::rule(
            name,
            RuleEffect {
                effect: exposure,
                source_guard: Formula::Atom(AtomTerm::at_placement(hq_pred)),
                target_guard: Formula::Atom(AtomTerm::at_target(grp)),
                max_distance: None,
                metric: Metric::Euclidean,
            },
        ));
    }
    d.cost = CostModel {
        default_cost: 0.5,
        rules: vec![CostRule {
            when: Formula::Atom(AtomTerm::at_placement(hi_cost)),
            cost: 1.0,
        }],
        overrides: BTreeMap::new(),
    };
    d.benefit = BenefitModel {
        per_predicate: BTreeMap::from([(exposure, 1.0)]),
        overrides: BTreeMap::new(),
    };
    d.ics.push(IntegrityConstraint::new(
        [ActionPoint::new(ActionId(1), hq(0)), ActionPoint::new(ActionId(2), hq(1))],
        Formula::True,
    ));
    d
}

/// Both campaign variants. The goal-based one asks for exposure on every
/// populated cell of the two central blocks and forbids nothing.
pub fn gen_campaign(params: CampaignParams) -> Campaign {
    let d = campaign_domain();
    let non_pop = d.predicate_id("non_pop").unwrap();
    let exposure = d.predicate_id("exposure").unwrap();
    let theta_in = rect1()
        .into_iter()
        .chain(rect2())
        .filter(|&p| !d.initial.contains(&GroundAtom::new(non_pop, p)))
        .map(|p| GroundAtom::new(exposure, p))
        .collect();
    Campaign {
        gbgop: GbgopInstance::new(d.clone(), params.gbgop_budget, theta_in, Vec::new())
            .expect("campaign goal sets are valid"),
        bmgop: BmgopInstance::new(d, params.k, params.bmgop_budget).expect("campaign parameters are valid"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Gbgop,
    Bmgop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomParams {
    pub width_bound: u32,
    pub height_bound: u32,
    pub predicates: usize,
    pub actions: usize,
    /// Reach of rule-form actions.
    pub radius: f64,
    pub ics: usize,
    pub seed: u64,
    pub kind: ProblemKind,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            width_bound: 3,
            height_bound: 3,
            predicates: 3,
            actions: 2,
            radius: 1.0,
            ics: 1,
            seed: 0,
            kind: ProblemKind::Bmgop,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("{what} = {value} exceeds the generator limit of {limit}")]
    TooLarge { what: &'static str, value: usize, limit: usize },
    #[error("{0} must be at least 1")]
    Empty(&'static str),
    #[error("radius {0} must be a finite number in [0, 64]")]
    BadRadius(f64),
}

/// Two decimals keep generated numbers exact through serialization.
fn quantized(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let (lo, hi) = ((lo * 100.0).round() as i64, (hi * 100.0).round() as i64);
    rng.gen_range(lo..=hi) as f64 / 100.0
}

fn random_atom(rng: &mut ChaCha8Rng, d: &Domain) -> GroundAtom {
    d.universe().atom_at(rng.gen_range(0..d.universe().atom_count()))
}

fn random_pair(rng: &mut ChaCha8Rng, d: &Domain) -> ActionPoint {
    d.pair_at(rng.gen_range(0..d.pair_count()))
}

fn random_domain(p: &RandomParams, rng: &mut ChaCha8Rng) -> Domain {
    let map = GridMap::new(p.width_bound, p.height_bound);
    let mut d = Domain::new(map, (0..p.predicates).map(|i| format!("g{i}")).collect());
    let u = d.universe();
    d.initial = State::from_indices(u, (0..u.atom_count()).filter(|_| rng.gen_bool(0.2)));
    let pred = |rng: &mut ChaCha8Rng| PredicateId(rng.gen_range(0..p.predicates));
    for a in 0..p.actions {
        let name = format!("a{a}");
        if rng.gen_bool(0.5) {
            let source_guard = if rng.gen_bool(0.5) {
                Formula::True
            } else {
                Formula::not(Formula::Atom(AtomTerm::at_placement(pred(rng))))
            };
            let target_guard = if rng.gen_bool(0.5) {
                Formula::True
            } else {
                Formula::not(Formula::Atom(AtomTerm::at_target(pred(rng))))
            };
            let metric = *[Metric::Euclidean, Metric::Manhattan, Metric::Chebyshev].choose(rng).unwrap();
            d.actions.push(ActionRule::rule(
                name,
                RuleEffect {
                    effect: pred(rng),
                    source_guard,
                    target_guard,
                    max_distance: Some(p.radius),
                    metric,
                },
            ));
        } else {
            let mut table = BTreeMap::new();
            for point in map.points() {
                if rng.gen_bool(0.5) {
                    let near = map.ball(point, p.radius, Metric::Euclidean);
                    let n = rng.gen_range(1..=3);
                    let atoms = (0..n).map(|_| GroundAtom::new(pred(rng), *near.choose(rng).unwrap())).collect();
                    table.insert(point, atoms);
                }
            }
            d.actions.push(ActionRule::explicit(name, table));
        }
    }
    d.cost = CostModel {
        default_cost: quantized(rng, 0.1, 1.0),
        rules: vec![CostRule {
            when: Formula::Atom(AtomTerm::at_placement(pred(rng))),
            cost: quantized(rng, 0.0, 1.0),
        }],
        overrides: BTreeMap::new(),
    };
    for _ in 0..2 {
        let pair = random_pair(rng, &d);
        let c = quantized(rng, 0.0, 1.0);
        d.cost.overrides.insert(pair, c);
    }
    d.benefit = BenefitModel {
        per_predicate: (0..p.predicates)
            .map(|i| (PredicateId(i), rng.gen_range(0..=6) as f64 * 0.5))
            .collect(),
        overrides: BTreeMap::new(),
    };
    let a = random_atom(rng, &d);
    d.benefit.overrides.insert(a, quantized(rng, 0.0, 4.0));
    for _ in 0..p.ics {
        let n = rng.gen_range(2..=3);
        let pairs: Vec<ActionPoint> = (0..n).map(|_| random_pair(rng, &d)).collect();
        let condition = if rng.gen_bool(0.7) {
            Formula::True
        } else {
            Formula::atom(random_atom(rng, &d))
        };
        d.ics.push(IntegrityConstraint::new(pairs, condition));
    }
    d
}

/// A seeded random instance. Identical parameters give identical instances.
pub fn gen_random(p: RandomParams) -> Result<Instance, GenError> {
    if p.predicates == 0 {
        return Err(GenError::Empty("predicates"));
    }
    if p.actions == 0 {
        return Err(GenError::Empty("actions"));
    }
    if !(p.radius.is_finite() && (0.0..=64.0).contains(&p.radius)) {
        return Err(GenError::BadRadius(p.radius));
    }
    let points = (p.width_bound as usize + 1).saturating_mul(p.height_bound as usize + 1);
    for (what, value) in [
        ("atom count", points.saturating_mul(p.predicates)),
        ("pair count", points.saturating_mul(p.actions)),
        ("constraint count", p.ics),
    ] {
        if value > MAX_GENERATED {
            return Err(GenError::TooLarge {
                what,
                value,
                limit: MAX_GENERATED,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let d = random_domain(&p, &mut rng);
    let inst = match p.kind {
        ProblemKind::Gbgop => {
            let count = rng.gen_range(1..=4);
            let theta_in: Vec<GroundAtom> = (0..count).map(|_| random_atom(&mut rng, &d)).collect();
            let theta_out: Vec<GroundAtom> = (0..rng.gen_range(0..=2))
                .map(|_| random_atom(&mut rng, &d))
                .filter(|a| !theta_in.contains(a) && !d.initial.contains(a))
                .collect();
            let budget = quantized(&mut rng, 1.0, 4.0);
            Instance::Gbgop(GbgopInstance::new(d, budget, theta_in, theta_out).expect("generated goals are valid"))
        }
        ProblemKind::Bmgop => {
            let k = rng.gen_range(1..=4);
            let budget = quantized(&mut rng, 0.5, 4.0);
            Instance::Bmgop(BmgopInstance::new(d, k, budget).expect("generated parameters are valid"))
        }
    };
    Ok(inst)
}
