use std::collections::BTreeSet;

use proptest::prelude::*;

use gop_core::bmgop::{
    bmgop_compute, lambda, objective_f, solve_bmgop_exact, solve_bmgop_ip, validate_bmgop, BmgopInstance, ConditionMode,
};
use gop_core::domain::EffectKind;
use gop_core::formula::{satisfies, Binding};
use gop_core::gbgop::{
    count_gbgop_solutions, reduce_to_r_star, solve_gbgop_exact, solve_gbgop_ip, validate_gbgop, GbgopError, GbgopInstance,
};
use gop_core::generate::{gen_random, ProblemKind, RandomParams};
use gop_core::io::{parse_instance, serialize_instance, Instance};
use gop_core::{ActionPoint, Domain, GroundAtom, Limits, Metric, Point};

fn params(kind: ProblemKind) -> impl Strategy<Value = RandomParams> {
    (0u32..=3, 0u32..=2, 1usize..=4, 1usize..=3, prop::sample::select(vec![0.0, 1.0, 1.5, 2.0]), 0usize..=3, any::<u64>())
        .prop_map(move |(w, h, predicates, actions, radius, ics, seed)| RandomParams {
            width_bound: w,
            height_bound: h,
            predicates,
            actions,
            radius,
            ics,
            seed,
            kind,
        })
}

fn gbgop(p: RandomParams) -> GbgopInstance {
    match gen_random(p).unwrap() {
        Instance::Gbgop(g) => g,
        Instance::Bmgop(_) => unreachable!(),
    }
}

fn bmgop(p: RandomParams) -> BmgopInstance {
    match gen_random(p).unwrap() {
        Instance::Bmgop(b) => b,
        Instance::Gbgop(_) => unreachable!(),
    }
}

fn within(metric: Metric, p: Point, q: Point, r: f64) -> bool {
    let dx = (p.x as i64 - q.x as i64).abs();
    let dy = (p.y as i64 - q.y as i64).abs();
    match metric {
        Metric::Euclidean => ((dx * dx + dy * dy) as f64) <= r * r + 1e-9,
        Metric::Manhattan => (dx + dy) as f64 <= r + 1e-9,
        Metric::Chebyshev => dx.max(dy) as f64 <= r + 1e-9,
    }
}

/// Effects read straight off the action definition, scanning every point.
fn effects_oracle(d: &Domain, pair: ActionPoint) -> BTreeSet<GroundAtom> {
    match &d.actions[pair.action.0].kind {
        EffectKind::Explicit(table) => table.get(&pair.point).into_iter().flatten().copied().collect(),
        EffectKind::Rule(r) => {
            if !r.source_guard.eval(&d.initial, Binding::placement(pair.point)) {
                return BTreeSet::new();
            }
            d.map
                .points()
                .filter(|&q| r.max_distance.is_none_or(|m| within(r.metric, pair.point, q, m)))
                .filter(|&q| r.target_guard.eval(&d.initial, Binding::pair(pair.point, q)))
                .map(|q| GroundAtom::new(r.effect, q))
                .collect()
        }
    }
}

fn subset(all: &[ActionPoint], mask: u32) -> Vec<ActionPoint> {
    (0..all.len()).filter(|i| mask >> i & 1 == 1).map(|i| all[i]).collect()
}

fn ics_oracle(d: &Domain, sol: &[ActionPoint]) -> bool {
    d.ics
        .iter()
        .filter(|ic| satisfies(&d.initial, &ic.condition))
        .all(|ic| sol.iter().filter(|p| ic.contains(p)).count() <= 1)
}

fn infeasible(e: &GbgopError) -> bool {
    matches!(e, GbgopError::Infeasible | GbgopError::Uncoverable { .. } | GbgopError::InherentlyInfeasible { .. })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn appl_matches_definition(p in params(ProblemKind::Bmgop), mask in any::<u32>()) {
        let inst = bmgop(p);
        let d = &inst.domain;
        let all: Vec<ActionPoint> = d.pairs().collect();
        for &pair in &all {
            let got: BTreeSet<GroundAtom> = d.effects(pair).into_iter().collect();
            prop_assert_eq!(got, effects_oracle(d, pair), "{}", d.pair_name(pair));
        }
        let sol: Vec<ActionPoint> = all.iter().enumerate().filter(|(i, _)| mask >> (i % 32) & 1 == 1).map(|(_, &q)| q).collect();
        let mut expect: BTreeSet<GroundAtom> = d.initial.atoms().collect();
        for &q in &sol {
            expect.extend(effects_oracle(d, q));
        }
        let got: BTreeSet<GroundAtom> = d.appl(&sol, &d.initial).atoms().collect();
        prop_assert_eq!(got, expect);
        prop_assert_eq!(d.check_ics(&sol).is_satisfied(), ics_oracle(d, &sol));
    }

    #[test]
    fn pair_sets_nest(p in params(ProblemKind::Gbgop)) {
        let inst = gbgop(p);
        let d = &inst.domain;
        let red = reduce_to_r_star(&inst);
        let all: BTreeSet<ActionPoint> = d.pairs().collect();
        let r: BTreeSet<ActionPoint> = red.r.iter().copied().collect();
        prop_assert!(r.is_subset(&all));
        prop_assert!(red.r_star.iter().all(|q| r.contains(q)));
        for q in all {
            let clean = effects_oracle(d, q).iter().all(|a| !inst.theta_out.contains(a));
            prop_assert_eq!(clean, r.contains(&q));
        }
    }

    #[test]
    fn goal_solvers_agree(p in params(ProblemKind::Gbgop)) {
        let inst = gbgop(p);
        prop_assume!(inst.domain.pair_count() <= 12);
        let all: Vec<ActionPoint> = inst.domain.pairs().collect();
        let valid: Vec<u32> = (0u32..1 << all.len()).filter(|&m| validate_gbgop(&inst, &subset(&all, m)).is_valid()).collect();
        let brute = valid.iter().map(|m| m.count_ones() as usize).min();
        let card = |r: Result<gop_core::gbgop::GbgopSolution, GbgopError>| match r {
            Ok(s) => {
                assert!(validate_gbgop(&inst, &s.pairs).is_valid());
                Some(s.cardinality)
            }
            Err(e) => {
                assert!(infeasible(&e), "{e}");
                None
            }
        };
        prop_assert_eq!(card(solve_gbgop_exact(&inst, Limits::default())), brute);
        prop_assert_eq!(card(solve_gbgop_ip(&inst, true, Limits::default())), brute);
        prop_assert_eq!(card(solve_gbgop_ip(&inst, false, Limits::default())), brute);
        prop_assert_eq!(count_gbgop_solutions(&inst, u64::MAX).unwrap(), valid.len() as u64);
    }

    #[test]
    fn benefit_solvers_agree(p in params(ProblemKind::Bmgop)) {
        let inst = bmgop(p);
        prop_assume!(inst.domain.pair_count() <= 12);
        let all: Vec<ActionPoint> = inst.domain.pairs().collect();
        let best = (0u32..1 << all.len())
            .map(|m| subset(&all, m))
            .filter(|s| validate_bmgop(&inst, s).is_empty())
            .map(|s| objective_f(&inst, &s))
            .fold(f64::NEG_INFINITY, f64::max);
        let exact = solve_bmgop_exact(&inst, Limits::default()).unwrap();
        let ip = solve_bmgop_ip(&inst, Limits::default()).unwrap();
        prop_assert!((exact.achieved_benefit - best).abs() < 1e-9);
        prop_assert!((ip.achieved_benefit - best).abs() < 1e-9);
        prop_assert!(validate_bmgop(&inst, &ip.pairs).is_empty());
    }

    #[test]
    fn greedy_is_valid_and_replays(p in params(ProblemKind::Bmgop), plain in any::<bool>()) {
        let inst = bmgop(p);
        let mode = if plain { ConditionMode::Plain } else { ConditionMode::Weighted };
        let delta = 0.001;
        let (sol, trace) = bmgop_compute(&inst, delta, mode).unwrap();
        prop_assert!(validate_bmgop(&inst, &sol.pairs).is_empty());
        prop_assert!((sol.achieved_benefit - objective_f(&inst, &sol.pairs)).abs() < 1e-9);

        let d = &inst.domain;
        let active: Vec<usize> = (0..d.ics.len()).filter(|&i| satisfies(&d.initial, &d.ics[i].condition)).collect();
        let (k, c, width) = (inst.k as f64, inst.budget, 2.0 - delta);
        let lam = lambda(delta, active.len());
        prop_assert!((trace.lambda - lam).abs() < 1e-9);
        let (mut wc, mut wb) = (1.0 / k, 1.0 / c);
        let mut wi = vec![1.0 / width; active.len()];
        let mut chosen: Vec<ActionPoint> = Vec::new();
        for r in &trace.iterations {
            let price = |q: ActionPoint| {
                wc + wb * d.cost_of(q)
                    + active.iter().enumerate().filter(|(_, &i)| d.ics[i].contains(&q)).map(|(j, _)| wi[j]).sum::<f64>()
            };
            let base = objective_f(&inst, &chosen);
            let gain = |q: ActionPoint| {
                let mut s = chosen.clone();
                s.push(q);
                objective_f(&inst, &s) - base
            };
            prop_assert!((r.gain - gain(r.chosen)).abs() < 1e-9);
            prop_assert!((r.ratio - price(r.chosen) / r.gain).abs() < 1e-9);
            for q in d.pairs().filter(|q| !chosen.contains(q) && gain(*q) > 0.0) {
                prop_assert!(price(q) / gain(q) >= r.ratio - 1e-9);
            }
            wc *= lam.powf(1.0 / k);
            wb *= lam.powf(d.cost_of(r.chosen) / c);
            for (j, &i) in active.iter().enumerate() {
                if d.ics[i].contains(&r.chosen) {
                    wi[j] *= lam.powf(1.0 / width);
                }
            }
            let cond = match mode {
                ConditionMode::Weighted => k * wc + c * wb + width * wi.iter().sum::<f64>(),
                ConditionMode::Plain => wc + wb + wi.iter().sum::<f64>(),
            };
            prop_assert!((r.w_card - wc).abs() < 1e-9 * wc.max(1.0));
            prop_assert!((r.w_cost - wb).abs() < 1e-9 * wb.max(1.0));
            prop_assert!((r.condition - cond).abs() < 1e-9 * cond.max(1.0));
            chosen.push(r.chosen);
        }
        let (again_sol, again) = bmgop_compute(&inst, delta, mode).unwrap();
        prop_assert_eq!(format!("{again:?}"), format!("{trace:?}"));
        prop_assert_eq!(again_sol, sol);
    }

    #[test]
    fn documents_round_trip(p in params(ProblemKind::Gbgop), bm in any::<bool>()) {
        let p = RandomParams { kind: if bm { ProblemKind::Bmgop } else { ProblemKind::Gbgop }, ..p };
        let inst = gen_random(p).unwrap();
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(serialize_instance(&back), text);
    }
}
