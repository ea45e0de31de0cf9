use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> String {
    format!("{}/../../scenarios/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_laforge")).args(args).env_remove("LAFORGE_TOL").output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn tmp(name: &str, body: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn shipped_scenarios_pass() {
    for s in ["trivial.json", "tangent.json", "crossed-module.json", "trivial-maps.json", "trivial-maps-gauged.json", "inline-crossed.json"] {
        let o = run(&["check", "--scenario", &scenario(s)]);
        assert_eq!(o.status.code(), Some(0), "{s}: {}", String::from_utf8_lossy(&o.stdout));
        assert_eq!(json(&o)["passed"], Value::Bool(true));
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = run(&["check", "--scenario", &scenario("trivial-maps-gauged.json")]);
    let b = run(&["check", "--scenario", &scenario("trivial-maps-gauged.json")]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["timing"], Value::Null);
}

#[test]
fn report_flag_writes_the_same_bytes() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("report.json");
    let o = run(&["check", "--scenario", &scenario("trivial.json"), "--report", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let direct = run(&["check", "--scenario", &scenario("trivial.json")]);
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn report_entries_carry_the_documented_fields() {
    let r = json(&run(&["check", "--scenario", &scenario("crossed-module.json")]));
    for suite in r["suites"].as_array().unwrap() {
        for e in suite["entries"].as_array().unwrap() {
            for key in ["name", "law", "kind", "applicable", "residual", "threshold", "passed", "worst"] {
                assert!(e.get(key).is_some(), "{key} missing in {e}");
            }
        }
    }
}

#[test]
fn broken_maurer_cartan_is_caught_and_isolated() {
    let o = run(&["mutate-check", "--scenario", &scenario("break-mc.json")]);
    assert_eq!(o.status.code(), Some(1));
    let r = json(&o);
    assert_eq!(r["selectivity"]["isolated"], Value::Bool(true));
    assert_eq!(r["selectivity"]["failing"], serde_json::json!(["matched/maurer-cartan", "morphisms/mult-maurer-cartan"]));
}

#[test]
fn mutation_magnitude_controls_the_exit_code() {
    let m0 = run(&["mutate-check", "--scenario", &scenario("break-mc.json"), "--magnitude", "0"]);
    assert_eq!(m0.status.code(), Some(0));
    let small = run(&["mutate-check", "--scenario", &scenario("break-mc.json"), "--magnitude", "-2e-4"]);
    assert_eq!(small.status.code(), Some(1));
}

#[test]
fn mutation_flag_on_check_runs_the_mutated_pair() {
    let o = run(&["check", "--scenario", &scenario("trivial-maps.json"), "--mutation", "break-omega-units"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn vacant_pair_cannot_be_given_a_curvature_defect() {
    let o = run(&["mutate-check", "--scenario", &scenario("tangent.json"), "--mutation", "break-MC"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("break-MC"));
}

#[test]
fn extraction_in_a_shifted_splitting_round_trips() {
    let o = run(&["extract", "--scenario", &scenario("transitive-core.json"), "--splitting", "shifted:0.3,-0.2,0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["round_trip"]["passed"], Value::Bool(true));
    let bad = run(&["extract", "--scenario", &scenario("transitive-core.json"), "--splitting", "constant:1,0,0"]);
    assert_eq!(bad.status.code(), Some(2));
    let garbled = run(&["extract", "--scenario", &scenario("transitive-core.json"), "--splitting", "sideways"]);
    assert_eq!(garbled.status.code(), Some(2));
}

#[test]
fn assemble_dumps_the_la_group() {
    let o = run(&["assemble", "--scenario", &scenario("crossed-module.json")]);
    assert_eq!(o.status.code(), Some(0));
    let lg = &json(&o)["la_group"];
    assert_eq!(lg["k"], 2);
    assert!(!lg["samples"].as_array().unwrap().is_empty());
}

#[test]
fn list_examples_names_every_family_and_mutation() {
    let r = json(&run(&["list-examples"]));
    assert_eq!(r["families"].as_array().unwrap().len(), 5);
    assert_eq!(r["mutations"].as_array().unwrap().len(), 7);
}

#[test]
fn invalid_input_exits_two_with_a_line_number() {
    let p = tmp("bad-samples.json", "{\n  \"example\": {\"family\": \"trivial\"},\n  \"samples\": 0\n}\n");
    let o = run(&["check", "--scenario", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let p = tmp("syntax.json", "{\n  \"example\": {\"family\": \"trivial\"},\n  \"samples\": ,\n}\n");
    let o = run(&["check", "--scenario", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(run(&["check", "--scenario", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn tolerance_precedence_is_flag_then_file_then_environment() {
    let p = tmp("no-tol.json", "{\"example\": {\"family\": \"trivial\"}, \"suites\": [\"ruth\"]}");
    let with_env = |args: &[&str]| {
        let o = Command::new(env!("CARGO_BIN_EXE_laforge")).args(args).env("LAFORGE_TOL", "1e-7").output().unwrap();
        json(&o)["scenario"]["tol"].as_f64().unwrap()
    };
    assert_eq!(with_env(&["check", "--scenario", p.to_str().unwrap()]), 1e-7);
    assert_eq!(with_env(&["check", "--scenario", p.to_str().unwrap(), "--tol", "1e-6"]), 1e-6);
    let q = tmp("tol.json", "{\"example\": {\"family\": \"trivial\"}, \"suites\": [\"ruth\"], \"tol\": 1e-9}");
    assert_eq!(with_env(&["check", "--scenario", q.to_str().unwrap()]), 1e-9);
}
