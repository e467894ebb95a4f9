use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

fn lemip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lemip")).args(args).env_remove("LEMIP_SEED").output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn honest_run_exits_zero_and_echoes_config() {
    let tiny = instance("tiny.json");
    let out = lemip(&["run", "--protocol", "zk-lemip", "--instance", tiny.to_str().unwrap(), "--trials", "50", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["seed"], 7);
    assert_eq!(r["config"]["trials"], 50);
    assert_eq!(r["config"]["protocol"], "zk-lemip");
    assert_eq!(r["result"]["accepts"], 50);
    assert!(String::from_utf8_lossy(&out.stderr).contains("accepted 50/50"));
}

#[test]
fn cheating_run_exits_one() {
    let unsat = instance("unsat.json");
    let out = lemip(&["run", "--protocol", "bfl-lemip", "--instance", unsat.to_str().unwrap(), "--adversary", "best-constant", "--trials", "20"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(report(&out)["result"]["rejects"].as_u64().unwrap() > 0);
}

#[test]
fn estimate_reports_a_wilson_interval_and_exits_zero() {
    let unsat = instance("unsat.json");
    let out = lemip(&["estimate", "--protocol", "zk-lemip", "--instance", unsat.to_str().unwrap(), "--adversary", "random-answers", "--committer", "guessing", "--trials", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let rate = &report(&out)["result"]["rate"];
    assert_eq!(rate["trials"], 30);
    assert!(rate["upper"].as_f64().unwrap() >= rate["point"].as_f64().unwrap());
}

#[test]
fn seed_falls_back_to_environment() {
    let tiny = instance("tiny.json");
    let out = Command::new(env!("CARGO_BIN_EXE_lemip"))
        .args(["run", "--protocol", "bfl-classic", "--instance", tiny.to_str().unwrap(), "--trials", "3"])
        .env("LEMIP_SEED", "4242")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["seed"], 4242);
}

#[test]
fn prbox_binding_attack() {
    let out = lemip(&["attack", "--name", "prbox-binding", "--trials", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["report"]["with_box"]["successes"], 200);
    assert_eq!(r["config"]["commit_k"], 16);
}

#[test]
fn simulate_and_compare() {
    let tiny = instance("tiny.json");
    let out = lemip(&["simulate", "--instance", tiny.to_str().unwrap(), "--trials", "20", "--sigma", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["report"]["rate"]["successes"], 20);
    let out = lemip(&["simulate", "--instance", tiny.to_str().unwrap(), "--trials", "300", "--sigma", "2", "--kind", "broken", "--compare"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["report"]["pass"], false);
}

#[test]
fn report_goes_to_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = lemip(&["attack", "--name", "ridiculous", "--trials", "10", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(r["command"], "attack");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(lemip(&["run", "--protocol", "zk-lemip", "--instance", "missing.json"]).status.code(), Some(2));
    assert_eq!(lemip(&["run", "--protocol", "nope", "--instance", "x.json"]).status.code(), Some(2));
    assert_eq!(lemip(&["frobnicate"]).status.code(), Some(2));
    let unsat = instance("unsat.json");
    assert_eq!(lemip(&["run", "--instance", unsat.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(lemip(&["simulate", "--instance", unsat.to_str().unwrap(), "--verifier", "nobody"]).status.code(), Some(2));
    assert_eq!(lemip(&["--help"]).status.code(), Some(0));
}
