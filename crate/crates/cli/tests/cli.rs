use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn gop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gop")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scenario(name: &str) -> String {
    scenarios().join(name).display().to_string()
}

#[test]
fn validate_minimal_document() {
    let o = gop(&["validate", &scenario("minimal.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("valid gbgop instance: 1 points"));
}

#[test]
fn reduce_campaign() {
    let o = gop(&["reduce", &scenario("campaign-gbgop.json")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("|R| = 561, |R*| = 7"));
    assert!(out.contains("appeal1@(4,3)"));

    let o = gop(&["--json", "reduce", &scenario("campaign-gbgop.json")]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["r"], 561);
    assert_eq!(v["members"].as_array().unwrap().len(), 7);
}

#[test]
fn approx_trace_header() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.txt");
    let o = gop(&[
        "solve",
        &scenario("campaign-bmgop.json"),
        "--method",
        "approx",
        "--delta",
        "0.001",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&trace).unwrap();
    let first = text.lines().next().unwrap();
    let lambda: f64 = first
        .split_whitespace()
        .find_map(|t| t.strip_prefix("lambda="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((lambda - 22.148).abs() < 0.01);
    assert!(first.contains("ic_s0=1"));
    assert!(text.lines().nth(1).unwrap().starts_with("iter 1 chosen=appeal1@(4,3)"));
}

#[test]
fn solve_methods_agree_on_campaign_goals() {
    for method in ["exact", "ip"] {
        let o = gop(&["--json", "solve", &scenario("campaign-gbgop.json"), "--method", method, "--reduced"]);
        assert_eq!(o.status.code(), Some(0), "{method}: {}", stderr(&o));
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["cardinality"], 3, "{method}");
        assert_eq!(v["proven_optimal"], true);
    }
}

#[test]
fn infeasible_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("cover.json");
    std::fs::write(&src, r#"{"universe":[1,2],"families":[[1]]}"#).unwrap();
    let inst = dir.path().join("inst.json");
    let o = gop(&["encode", "set-cover", src.to_str().unwrap(), "-o", inst.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = gop(&["solve", inst.to_str().unwrap(), "--method", "exact"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[E_INFEASIBLE]"));
}

#[test]
fn limit_exit_code_prints_best_so_far() {
    let o = gop(&["--json", "solve", &scenario("campaign-bmgop.json"), "--method", "exact", "--max-nodes", "5"]);
    assert_eq!(o.status.code(), Some(3));
    let err: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(err["error"]["code"], "E_LIMIT");
    if !o.stdout.is_empty() {
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["status"], "limit_reached");
        assert_eq!(v["proven_optimal"], false);
    }
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"version\": 1,\n  oops\n}").unwrap();
    let o = gop(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("E_SYNTAX"));
    assert!(stderr(&o).contains("line 3"));

    assert_eq!(gop(&["solve"]).status.code(), Some(2));
    assert_eq!(gop(&["frobnicate"]).status.code(), Some(2));
    let o = gop(&["solve", &scenario("minimal.json"), "--method", "fast"]);
    assert_eq!(o.status.code(), Some(2));
    let o = gop(&["count", &scenario("campaign-gbgop.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("E_TOO_LARGE"));
    let o = gop(&["reduce", &scenario("campaign-bmgop.json")]);
    assert!(stderr(&o).contains("E_PROBLEM_KIND"));
}

#[test]
fn encode_and_count_monsat() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("m.json");
    let o = gop(&["encode", "monsat", &scenario("cover/monsat.json"), "-o", inst.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = gop(&["--json", "count", inst.to_str().unwrap()]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["count"], 5);
}

#[test]
fn emit_lp_writes_program() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("c.lp");
    let o = gop(&["emit-lp", &scenario("campaign-gbgop.json"), "-o", lp.to_str().unwrap(), "--reduced"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&lp).unwrap();
    assert!(text.contains("Minimize"));
    assert!(text.contains("x_appeal1_4_3"));
    assert!(text.trim_end().ends_with("End"));
}

#[test]
fn gen_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = gop(&["gen", "random", "--seed", "11", "--kind", "bmgop", "-o", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let o = gop(&["gen", "campaign", "-o", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(scenarios().join("campaign-gbgop.json")).unwrap());
}

#[test]
fn bench_directory() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = gop(&["bench", &scenario("bench"), "-o", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).lines().next().unwrap().starts_with("instance"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 4);
    assert!(v["timings"].is_array());
}

#[test]
fn repeated_runs_match() {
    let runs = [
        vec!["--json", "solve", "CAMPAIGN_B", "--method", "approx"],
        vec!["solve", "CAMPAIGN_G", "--method", "exact"],
        vec!["reduce", "CAMPAIGN_G"],
        vec!["validate", "CAMPAIGN_B"],
    ];
    let (b, g) = (scenario("campaign-bmgop.json"), scenario("campaign-gbgop.json"));
    for run in runs {
        let args: Vec<&str> = run
            .iter()
            .map(|a| match *a {
                "CAMPAIGN_B" => b.as_str(),
                "CAMPAIGN_G" => g.as_str(),
                other => other,
            })
            .collect();
        let first = gop(&args);
        let second = gop(&args);
        assert_eq!(first.stdout, second.stdout, "{args:?}");
        assert_eq!(first.status.code(), Some(0));
    }
}
