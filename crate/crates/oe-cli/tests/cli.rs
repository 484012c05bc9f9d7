//! End-to-end checks of the `oe` binary: exit-code contract, JSON output
//! fields, environment-variable budget handling, and file round-trips
//! through every on-disk format the subcommands exchange.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use oe_core::coloring::{families_from_coloring, EdgeColoring};
use oe_core::family::{Family, FamilySystem, GroundSet, OverlapSpec};
use oe_core::tournament::t5_graph;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_oe"));
    c.env_remove("OE_BUDGET");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn exact_search_json_matches_closed_form() {
    let out = run(&["search", "exact", "--n", "3", "--ell", "2", "--m", "1", "--json"]);
    let v = stdout_json(&out);
    assert_eq!(v["value"], "32");
    assert_eq!(v["exhaustive"], true);
    assert_eq!(v["per_family_sizes"].as_array().unwrap().len(), 2);
}

#[test]
fn exit_codes_follow_the_contract() {
    // Success → 0.
    let ok = run(&["search", "exact", "--n", "3", "--ell", "2", "--m", "1"]);
    assert_eq!(ok.status.code(), Some(0));

    // Unknown subcommand → 2.
    let unknown = run(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));

    // Missing required flag → 2.
    let missing = run(&["search", "exact", "--ell", "2", "--m", "1"]);
    assert_eq!(missing.status.code(), Some(2));

    // Domain error (no quadratic-residue tournament on 5 vertices) → 1.
    let domain = run(&["tournament", "paley", "--p", "5"]);
    assert_eq!(domain.status.code(), Some(1));
}

#[test]
fn malformed_budget_env_is_a_usage_error() {
    let out = bin()
        .env("OE_BUDGET", "a-lot")
        .args(["search", "exact", "--n", "3", "--ell", "2", "--m", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("OE_BUDGET"));
}

#[test]
fn budget_env_overrides_flag_and_reports_non_exhaustive() {
    // 70 nodes cannot cover the (5,2,1) search space; the run must still
    // succeed but flag itself as a lower bound.
    let out = bin()
        .env("OE_BUDGET", "70")
        .args([
            "search", "exact", "--n", "5", "--ell", "2", "--m", "1", "--budget", "100000000",
            "--json",
        ])
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["exhaustive"], false, "env budget must win over the flag");
    // The budget is shared across the fixed task decomposition (each task
    // keeps a ≥ 1 node floor), so the count may overshoot 70 — but it must
    // stay well below the 960 nodes of the unrestricted run.
    assert!(v["nodes_explored"].as_u64().unwrap() < 500);
}

#[test]
fn verify_reports_violations_with_witness_and_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.sys");

    // Two copies of the full power set on 3 points violate every pairwise
    // bound of 1: the system is structurally valid, just not admissible.
    let ground = GroundSet::new(3).unwrap();
    let cube = Family::cube(ground, ground.full()).unwrap();
    let spec = OverlapSpec::uniform(2, 1).unwrap();
    let sys = FamilySystem::new(spec, vec![cube.clone(), cube]).unwrap();
    std::fs::write(&path, sys.to_text()).unwrap();

    let out = run(&["verify", "overlap", "--sys", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("VIOLATED"));

    let json_out = run(&["--json", "verify", "overlap", "--sys", path.to_str().unwrap()]);
    assert_eq!(json_out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&json_out.stdout).unwrap();
    assert_eq!(v["ok"], false);
    assert!(v["witness"]["intersection"].as_array().unwrap().len() > 1);
}

#[test]
fn system_file_round_trip_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.sys");
    let out = run(&[
        "construct", "two-family", "--n", "5", "--t", "1", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    for check in ["overlap", "down-closed", "rinott"] {
        let v = run(&["verify", check, "--sys", path.to_str().unwrap()]);
        assert_eq!(v.status.code(), Some(0), "verify {check}");
    }

    let sys = FamilySystem::parse_text(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(sys.product().to_string(), "192"); // (5+1)·2^5
}

#[test]
fn coloring_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("best.col");
    let out = run(&[
        "search", "exact", "--n", "4", "--ell", "2", "--m", "1", "--out",
        path.to_str().unwrap(), "--json",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["value"], "80");

    let (coloring, ell) =
        EdgeColoring::parse_text(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let sys = families_from_coloring(&coloring, ell).unwrap();
    assert_eq!(sys.product().to_string(), "80");
}

fn write_t5_graph(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("t5.graph");
    std::fs::write(&path, t5_graph().to_text()).unwrap();
    path
}

#[test]
fn plan_json_round_trip_through_octopus() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_t5_graph(dir.path());
    let plan = dir.path().join("plan.json");

    let out = run(&[
        "construct", "balanced", "--n", "20", "--m", "1", "--graph",
        graph.to_str().unwrap(), "--out", plan.to_str().unwrap(), "--json",
    ]);
    assert!(out.status.success());

    let sys = run(&[
        "construct", "octopus", "--plan", plan.to_str().unwrap(), "--json",
    ]);
    let v = stdout_json(&sys);
    assert_eq!(v["product"], "61917364224");
    assert_eq!(v["overlap_ok"], true);
    let mut sizes: Vec<u64> = v["sizes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_u64().unwrap())
        .collect();
    sizes.sort_unstable();
    assert_eq!(sizes, vec![108, 108, 108, 192, 256]);
}

#[test]
fn l5_plan_round_trip_reproduces_the_system() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("l5.json");
    let first = run(&[
        "construct", "l5", "--n", "15", "--seed", "4", "--json", "--plan-out",
        plan.to_str().unwrap(),
    ]);
    let v1 = stdout_json(&first);

    let second = run(&["construct", "l5", "--plan", plan.to_str().unwrap(), "--json"]);
    let v2 = stdout_json(&second);
    assert_eq!(v1["product"], v2["product"]);
    assert_eq!(v1["sizes"], v2["sizes"]);
    assert_eq!(v1["overlap_ok"], true);
}

#[test]
fn graph_file_feeds_the_functional_evaluator() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_t5_graph(dir.path());
    let out = run(&["tournament", "r", "--in", graph.to_str().unwrap(), "--json"]);
    let v = stdout_json(&out);
    assert_eq!(v["r"], 7);
    assert_eq!(v["ell"], 5);
}
