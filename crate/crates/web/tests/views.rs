use gop_web::{curve, greedy_view, map_view, reduction_view};

#[test]
fn map_has_every_campaign_point() {
    let m = map_view();
    assert_eq!((m.width, m.height), (17, 11));
    assert_eq!(m.cells.len(), 187);
    let hq = m.cells.iter().find(|c| (c.x, c.y) == (4, 3)).unwrap();
    assert!(hq.atoms.iter().any(|a| a == "hq1"));
}

#[test]
fn default_greedy_matches_the_library() {
    let v = greedy_view(0.001, 3, 2.0, "weighted").unwrap();
    assert_eq!(v.picks.len(), 3);
    assert!(v.picks.iter().any(|p| p.action == "appeal1" && (p.x, p.y) == (4, 3)));
    assert!((v.lambda - 22.145012208385705).abs() < 1e-9);
    assert!(v.bound_applicable);
    let opt = v.optimum.unwrap();
    assert!(v.benefit <= opt + 1e-9);
    assert!(v.benefit >= v.bound * opt - 1e-9);
    assert_eq!(v.exposed.len() as f64, v.benefit);
    assert!(v.trace.starts_with("delta=0.001 "));
}

#[test]
fn greedy_rejects_bad_input() {
    assert!(greedy_view(0.001, 3, 2.0, "fancy").is_err());
    assert!(greedy_view(0.0, 3, 2.0, "plain").is_err());
    assert!(greedy_view(0.001, 3, -1.0, "plain").is_err());
    assert!(greedy_view(0.001, 0, 2.0, "plain").is_err());
}

#[test]
fn curve_declines() {
    let c = curve(0.001, 5).unwrap();
    assert_eq!(c.len(), 6);
    assert!((c[0].bound - 0.706984198248454).abs() < 1e-12);
    assert!(c.windows(2).all(|w| w[1].bound < w[0].bound));
    assert!(curve(1.5, 3).is_err());
}

#[test]
fn reduction_keeps_the_appeal() {
    let r = reduction_view();
    assert_eq!(r.r, 561);
    assert_eq!(r.r_star.len(), 7);
    assert!(r.r_star.iter().any(|p| p.action == "appeal1" && (p.x, p.y) == (4, 3)));
}
