use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qmap(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qmap"));
    cmd.args(args).env_remove("QMAP_BUDGET_QUBITS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

#[test]
fn region_of_ghz_has_three_constraints() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.json", r#"{"preset": {"name": "ghz", "k": 4}}"#);
    let out = qmap(&["region", "--spec", &spec], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["z"], 2);
    assert_eq!(v["entries"].as_array().unwrap().len(), 3);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn check_and_split_agree_on_interior_point() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.json", r#"{"preset": {"name": "ghz", "k": 4}}"#);
    let cfg = write(dir.path(), "c.json", r#"{"rates": [0.3, 0.3]}"#);
    let check = json(&qmap(&["check", "--spec", &spec, "--config", &cfg], &[]));
    assert_eq!(check["member"], true);
    let out = qmap(&["split", "--spec", &spec, "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0));
    let split = json(&out);
    assert!(split["upper_margin"].as_f64().unwrap() > 0.0);
    assert!(split["lower_margin"].as_f64().unwrap() > 0.0);
    for z in 0..2 {
        let c = split["c"][z].as_f64().unwrap();
        let d = split["d"][z].as_f64().unwrap();
        assert_eq!(c, d + 0.3);
    }
}

#[test]
fn split_outside_region_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.json", r#"{"preset": {"name": "ghz", "k": 4}}"#);
    let cfg = write(dir.path(), "c.json", r#"{"rates": [0.9, 0.9]}"#);
    let out = qmap(&["split", "--spec", &spec, "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_spec = write(dir.path(), "bad.json", r#"{"preset": {"name": "bell"}, "extra": 1}"#);
    assert_eq!(qmap(&["region", "--spec", &bad_spec], &[]).status.code(), Some(2));
    let spec = write(dir.path(), "s.json", r#"{"preset": {"name": "bell"}}"#);
    let cfg = write(dir.path(), "c.json", r#"{"l_sizes": [2, 2], "trials": 1}"#);
    let out = qmap(&["simulate-randomization", "--spec", &spec, "--config", &cfg, "--seed", "1"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("l_sizes"));
    let cfg = write(dir.path(), "c1.json", r#"{"l_sizes": [2]}"#);
    let out = qmap(&["simulate-randomization", "--spec", &spec, "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2), "missing seed");
    assert_eq!(qmap(&["no-such-command"], &[]).status.code(), Some(2));
}

#[test]
fn budget_overflow_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.json", r#"{"preset": {"name": "ghz", "k": 4}}"#);
    let cfg = write(dir.path(), "c.json", r#"{"n": 2, "l_sizes": [2, 2]}"#);
    let args = ["simulate-randomization", "--spec", &spec, "--config", &cfg, "--seed", "3"];
    assert_eq!(qmap(&args, &[("QMAP_BUDGET_QUBITS", "6")]).status.code(), Some(4));
    assert_eq!(qmap(&args, &[]).status.code(), Some(0));
    assert_eq!(qmap(&args, &[("QMAP_BUDGET_QUBITS", "lots")]).status.code(), Some(2));
}

#[test]
fn lemma_suites_pass_and_injection_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = qmap(&["verify-lemmas", "--seed", "8"], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);
    let cfg = write(dir.path(), "c.json", r#"{"inject_counterexample": true, "states": 2}"#);
    let out = qmap(&["verify-lemmas", "--seed", "8", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    let failed: Vec<&str> = v["suites"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|s| s["passed"] == false)
        .map(|s| s["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["polymatroid"]);
}

#[test]
fn out_directory_receives_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.json", r#"{"preset": {"name": "bell"}}"#);
    let cfg = write(dir.path(), "c.json", r#"{"m_sizes": [4], "family": "pauli"}"#);
    let out_dir: PathBuf = dir.path().join("out");
    let out = qmap(
        &["simulate-code", "--spec", &spec, "--config", &cfg, "--seed", "2", "--out", out_dir.to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("code.json")).unwrap()).unwrap();
    assert!(report["estimates"]["epsilon"].as_f64().unwrap().abs() < 1e-10);
    assert!(report["flags"].as_array().unwrap().iter().any(|f| f == "deterministic-family-extension"));
    let csv = std::fs::read_to_string(out_dir.join("code.csv")).unwrap();
    assert!(csv.starts_with("trial_index,metric_name,value"));
    assert_eq!(std::fs::read(out_dir.join("code.json")).unwrap(), out.stdout);
}

#[test]
fn encoding_sweep_writes_one_report_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.json", r#"{"preset": {"name": "werner", "p": 0.9}}"#);
    let cfg = write(dir.path(), "c.json", r#"{"sweep": [1, 2, 4], "trials": 3}"#);
    let out_dir = dir.path().join("out");
    let out = qmap(
        &["simulate-encoding", "--spec", &spec, "--config", &cfg, "--seed", "5", "--out", out_dir.to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    for k in [1, 2, 4] {
        assert!(out_dir.join(format!("encoding_{k}.json")).exists());
    }
    let table = std::fs::read_to_string(out_dir.join("encoding_sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    let v = json(&out);
    assert!((v["points"][0]["mean"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}
