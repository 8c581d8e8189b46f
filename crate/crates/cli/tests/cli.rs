use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn efsolver(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_efsolver")).args(args).output().expect("binary runs")
}

fn path(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel).to_string_lossy().into_owned()
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| l.starts_with('{'))
        .map(|l| serde_json::from_str(l).expect("valid JSON"))
        .collect()
}

#[test]
fn solves_and_verifies_a_benchmark() {
    let out = efsolver(&[
        "solve",
        &path("../core/benchmarks/A.efp"),
        "--strategy",
        "split-all",
        "--epsilon",
        "0.001",
        "--verify",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports = json_lines(&out);
    assert_eq!(reports.len(), 1);
    let r = &reports[0];
    assert_eq!(r["instance"], "A");
    assert_eq!(r["verified"], true);
    assert_eq!(r["strategy"], "split-all");
    assert_eq!(r["x"].as_array().map(Vec::len), Some(5));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verified"));
}

#[test]
fn infeasible_problem_exits_one() {
    let out = efsolver(&["solve", &path("tests/data/infeasible.efp")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("infeasible"));
}

#[test]
fn exhausted_budget_exits_two() {
    let out = efsolver(&["solve", &path("../core/benchmarks/A.efp"), "--max-splits", "0", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_lines(&out)[0]["splits"], 0);
}

#[test]
fn input_errors_exit_three() {
    let bad = efsolver(&["solve", &path("tests/data/malformed.efp")]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error:"));
    let missing = efsolver(&["solve", &path("tests/data/no-such-file.efp")]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn bench_reports_are_deterministic() {
    let run = || {
        let out = efsolver(&["bench", "--json"]);
        assert_eq!(out.status.code(), Some(0));
        json_lines(&out)
            .iter()
            .map(|r| {
                (
                    r["instance"].to_string(),
                    r["strategy"].to_string(),
                    r["outcome"].to_string(),
                    r["splits"].as_u64(),
                    r["split_rounds"].as_u64(),
                )
            })
            .collect::<Vec<_>>()
    };
    let first = run();
    assert_eq!(first.len(), 12);
    assert_eq!(first, run());
}
