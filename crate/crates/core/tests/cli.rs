use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sqnc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqnc")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name).display().to_string()
}

#[test]
fn rate_reports_the_two_to_twenty_example() {
    let out = sqnc(&["rate", "--q", "2", "--m0", "3", "--m1", "1", "--ell", "1048576"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["alpha"], 100);
    assert_eq!(v["k"], 2400);
    assert!((v["rate"].as_f64().unwrap() - 0.858).abs() < 5e-4);

    let sweep = sqnc(&["rate", "--m0", "3", "--m1", "1", "--ell", "16384", "65536"]);
    assert_eq!(json(&sweep).as_array().unwrap().len(), 2);
}

#[test]
fn simulate_without_attack_chains_to_zero_leakage() {
    let dir = tempfile::tempdir().unwrap();
    let out = sqnc(&[
        "simulate",
        "--config",
        &config("no_attack_parallel.json"),
        "--out",
        dir.path().to_str().unwrap(),
        "--trials",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let cell = &v["cells"][0];
    assert_eq!(cell["bit"]["rate"], 0.0);
    assert_eq!(cell["phase"]["rate"], 0.0);
    assert_eq!(cell["fidelity_lower"], 1.0);
    assert_eq!(cell["leakage_bits"], 0.0);
    let csv = std::fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert_eq!(csv.lines().count(), 41);
    let on_disk: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(on_disk, v);
}

#[test]
fn generated_network_has_invertible_transfer() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    let p = path.to_str().unwrap();
    let gen = sqnc(&["network", "gen", "--seed", "7", "--m0", "3", "--c", "4", "--attacked", "0", "--out", p]);
    assert_eq!(gen.status.code(), Some(0));
    let validate = sqnc(&["network", "validate", p]);
    assert_eq!(validate.status.code(), Some(0));
    assert_eq!(json(&validate)["valid"], true);
    let transfer = sqnc(&["network", "transfer", p]);
    assert_eq!(transfer.status.code(), Some(0));
    let v = json(&transfer);
    assert_eq!(v["k_invertible"], true);
    assert_eq!(v["k_rank"], 3);
    assert_eq!(v["w"].as_array().unwrap().len(), 3);
}

#[test]
fn invalid_inputs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"q": {"p": 2, "d": 1}, "m0": 2, "nodes": [], "edges": [[0, 1]]}"#).unwrap();
    let out = sqnc(&["network", "validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["valid"], false);

    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"field": {"p": 2, "d": 1}, "params": {"mode": "override", "alpha": 8, "n_prime": 12},
        "m0": 3, "m1": 2, "networks": [{"kind": "parallel"}], "strategies": [{"kind": "no_attack"}], "trials": 5}"#)
        .unwrap();
    let out = sqnc(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));

    assert_eq!(sqnc(&["simulate"]).status.code(), Some(1));
}

#[test]
fn qcheck_suite_passes() {
    let out = sqnc(&["qcheck"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn lemmas_report_both_subspace_references() {
    let out = sqnc(&["lemmas", "--trials", "5000", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    let sub = &v["subspace"][0];
    assert!((sub["exact"].as_f64().unwrap() - 16.0 / 35.0).abs() < 1e-12);
    assert!(sub["first_factor_q_n0"].as_f64().unwrap() < sub["exact"].as_f64().unwrap());
}
