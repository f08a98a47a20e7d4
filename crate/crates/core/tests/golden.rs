use gop_core::bmgop::{build_bmgop_ip, solve_bmgop_ip};
use gop_core::io::{parse_instance, serialize_instance, Instance};
use gop_core::ip::emit_lp;
use gop_core::Limits;

const DOC: &str = include_str!("data/two_point.json");
const LP: &str = include_str!("data/two_point.lp");

fn instance() -> gop_core::bmgop::BmgopInstance {
    match parse_instance(DOC).unwrap() {
        Instance::Bmgop(b) => b,
        Instance::Gbgop(_) => panic!("fixture is a bmgop document"),
    }
}

#[test]
fn two_point_lp_matches_golden_file() {
    assert_eq!(emit_lp(&build_bmgop_ip(&instance())), LP);
}

#[test]
fn two_point_optimum() {
    let sol = solve_bmgop_ip(&instance(), Limits::default()).unwrap();
    assert_eq!(sol.cardinality, 1);
    assert_eq!(sol.achieved_benefit, 3.0);
}

#[test]
fn two_point_reserializes_stably() {
    let inst = parse_instance(DOC).unwrap();
    let text = serialize_instance(&inst);
    assert_eq!(serialize_instance(&parse_instance(&text).unwrap()), text);
}
