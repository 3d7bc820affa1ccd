use std::path::PathBuf;
use std::process::Command;

use lefschetz::cli::{run, EXIT_FAIL, EXIT_INPUT, EXIT_OK};
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("lefschetz").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lefschetz-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const PAIR: &str = "surface g=1 b=0\ncurve C hom=[1,0] sep=false\n";

#[test]
fn invariants_json_for_w() {
    let (code, out, _) = call(&["invariants", "catalog:W", "--json"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["e_fib"], 4);
    assert_eq!(v["sigma"], -4);
    assert_eq!(v["c1sq_fib"], -4);
    assert_eq!(v["predicates"]["scy"], "PASS");
}

#[test]
fn pi1_of_w() {
    let (code, out, _) = call(&["pi1", "W"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("Certified ℤ⁴"), "{out}");
}

#[test]
fn verify_w1_and_all() {
    assert_eq!(call(&["verify", "catalog:W1"]).0, EXIT_OK);
    let (code, out, _) = call(&["verify", "--all"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(!out.contains("FAIL"));
}

#[test]
fn unknown_curve_is_located() {
    let p = scratch("bogus.lf", &format!("{PAIR}word: C Bogus\n"));
    let (code, _, err) = call(&["verify", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("3:9: error: unknown curve `Bogus`"), "{err}");
}

#[test]
fn cancelling_word_verifies() {
    let p = scratch("pair.lf", &format!("{PAIR}word: C ~C\n"));
    let (code, out, _) = call(&["verify", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("PASS"), "{out}");
    let p = scratch("single.lf", &format!("{PAIR}word: C\n"));
    assert_eq!(call(&["verify", p.to_str().unwrap()]).0, EXIT_FAIL);
}

#[test]
fn bad_input_exits_two() {
    assert_eq!(call(&["verify", "catalog:nope"]).0, EXIT_INPUT);
    assert_eq!(call(&["frobnicate"]).0, EXIT_INPUT);
    assert_eq!(call(&["pi1", "W", "--budget", "x"]).0, EXIT_INPUT);
}

#[test]
fn catalog_check_reports_conflict() {
    let (code, out, _) = call(&["catalog", "check", "W2"]);
    assert_eq!(code, EXIT_FAIL);
    assert!(out.contains("FAIL h1"), "{out}");
    assert_eq!(call(&["catalog", "check", "W1"]).0, EXIT_OK);
}

#[test]
fn export_then_verify_files() {
    let dir = std::env::temp_dir().join(format!("lefschetz-export-{}", std::process::id()));
    let (code, out, _) = call(&["catalog", "export", dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let files: Vec<&str> = out.lines().collect();
    assert!(files.len() > 20);
    for f in files {
        assert_eq!(call(&["verify", f]).0, EXIT_OK, "{f}");
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn oracles() {
    let (_, out, _) = call(&["oracle", "rational-obstruction", "3", "5", "--json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["result"].to_string().contains('9'), "{out}");
    let (_, out, _) = call(&["oracle", "ruled", "3", "4", "--json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["both_excluded"], true);
}

#[test]
fn binary_runs() {
    let out = Command::new(env!("CARGO_BIN_EXE_lefschetz")).args(["h1", "W"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ℤ⁴");
}
