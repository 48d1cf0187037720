use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name].iter().collect();
    p.display().to_string()
}

fn pgcl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgcl")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = pgcl(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    });
    (out.status.code().expect("exit code"), v)
}

#[test]
fn reports_share_a_schema() {
    let (code, v) = json(&["wp", &fixture("fig5.pgcl")]);
    assert_eq!(code, 0);
    for key in ["command", "file", "domain_size", "verdict", "values", "counterexamples", "warnings", "timing_ms"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["command"], "wp");
    assert_eq!(v["preexpectation"], "y + 3");
}

#[test]
fn wp_evaluates_at_given_states() {
    let (code, v) = json(&["wp", &fixture("ex51.pgcl"), "--eval", "x=0,y=3,z=1"]);
    assert_eq!(code, 0);
    assert_eq!(v["preexpectation"], "min(y, z)");
    assert_eq!(v["values"][0]["value"], "1");
}

#[test]
fn wp_of_a_loop_needs_wpre() {
    let (code, v) = json(&["wp", &fixture("fig1.pgcl")]);
    assert_eq!(code, 2);
    assert_eq!(v["verdict"], false);
    assert_eq!(v["exit_code"], 2);
    let (code, _) = json(&["wp", &fixture("fig1.pgcl"), "--transformer", "wpre-awp"]);
    assert_eq!(code, 0);
}

#[test]
fn check_passes_and_fails_with_exit_codes() {
    let (code, v) = json(&["check", &fixture("ex46.pgcl")]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["verdict"], true);

    let (code, v) = json(&["check", &fixture("ex46_tampered.pgcl")]);
    assert_eq!(code, 1);
    assert!(!v["counterexamples"].as_array().unwrap().is_empty());
}

#[test]
fn mismatched_provider_is_a_usage_error() {
    let (code, v) = json(&["check", &fixture("ex46.pgcl"), "--provider", "superinv", "--transformer", "awp"]);
    assert_eq!(code, 2);
    assert!(v["error"].as_str().unwrap().contains("superinv"));
}

#[test]
fn a_loop_that_never_exits_fails_termination() {
    let (code, v) = json(&["check", &fixture("while_skip.pgcl"), "--provider", "dast-subinv"]);
    assert_eq!(code, 1, "{v}");
    assert_eq!(v["loops"][0]["dast"]["holds"], false);
}

#[test]
fn monty_hall_switching_wins_two_thirds() {
    let (code, v) = json(&["mdp", &fixture("monty_hall.pgcl"), "--mode", "max", "--strategy"]);
    assert_eq!(code, 0);
    assert_eq!(v["exact"], true);
    for e in v["values"].as_array().unwrap() {
        assert_eq!(e["value"], "2/3");
    }
    assert!(v["strategy"].as_array().is_some_and(|r| !r.is_empty()));
}

#[test]
fn mdp_export_writes_the_model() {
    let dir = std::env::temp_dir().join(format!("pgcl-export-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fig6.txt");
    let (code, _) = json(&["mdp", &fixture("fig6.pgcl"), "--mode", "min", "--export", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.is_empty());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn escaping_the_domain_is_a_resource_error_unless_truncated() {
    let (code, v) = json(&["mdp", &fixture("fig1.pgcl"), "--mode", "max"]);
    assert_eq!(code, 3, "{v}");
    let (code, v) = json(&["--escape", "truncate", "mdp", &fixture("fig1.pgcl"), "--mode", "max"]);
    assert_eq!(code, 0, "{v}");
}

#[test]
fn state_budget_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_pgcl"))
        .args(["--json", "mdp", &fixture("monty_hall.pgcl"), "--mode", "max"])
        .env("PGCL_STATE_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["error"].as_str().unwrap().contains("10"));
}

#[test]
fn transform_reports_implementation_and_determinism() {
    let (code, v) = json(&["transform", &fixture("ex51.pgcl"), "--determinize"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["implements"], true);
    assert_eq!(v["deterministic"], true);

    let (code, v) = json(&["transform", &fixture("nim_tampered.pgcl")]);
    assert_eq!(code, 1, "{v}");
}

#[test]
fn unparsable_input_is_a_usage_error() {
    let dir = std::env::temp_dir().join(format!("pgcl-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.pgcl");
    std::fs::write(&path, "program { x := }").unwrap();
    let out = pgcl(&["wp", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn selftest_runs_a_small_corpus() {
    let (code, v) = json(&["selftest", "--cases", "20"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["checked"], 20);
}
