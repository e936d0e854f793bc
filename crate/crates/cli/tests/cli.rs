use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn ddb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddb")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    let v: Value = serde_json::from_str(&stdout(o)).unwrap();
    assert_eq!(v["schema"], 1);
    v
}

#[test]
fn partitions_output() {
    assert_eq!(stdout(&ddb(&["partitions", "--dim", "2", "--format", "text"])), "(0,1)\n");
    let v = json(&ddb(&["partitions", "--dim", "6"]));
    assert_eq!(v["partitions"].as_array().unwrap().len(), 5);
    assert_eq!(v["partitions"][0]["pairs"], serde_json::json!([[0, 1], [2, 5], [3, 4]]));
    assert_eq!(ddb(&["partitions", "--dim", "1"]).status.code(), Some(2));
}

#[test]
fn bases_output() {
    let v = json(&ddb(&["bases", "--dim", "7"]));
    assert_eq!(v["bases"].as_array().unwrap().len(), 14);
    let b3 = json(&ddb(&["bases", "--dim", "4", "--label", "B3"]));
    assert_eq!(b3["label"], "B3");
    assert_eq!(b3["vectors"][0], serde_json::json!([[0, "0.7071067811865476", "0"], [3, "0.7071067811865476", "0"]]));
    assert_eq!(ddb(&["bases", "--dim", "4", "--label", "B9"]).status.code(), Some(2));
}

#[test]
fn circuit_output() {
    let s = stdout(&ddb(&["circuits", "--n", "2", "--label", "B3"]));
    assert_eq!(s, "# qubits=2 ancillas=0\nCX q1 ; c+ q0\n# layer XZ\n# outcomes 0 2 1 3\n");
    let q = stdout(&ddb(&["circuits", "--n", "3", "--label", "C5", "--emit", "qasm", "--counts"]));
    assert!(q.starts_with("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n"));
    assert!(q.contains("sdg q[0];\nh q[0];\n"));
    assert!(q.contains("// count total=4 "));
    let v = json(&ddb(&["--format", "json", "circuits", "--n", "4", "--label", "B13", "--counts"]));
    assert!(v["counts"]["total"].as_u64().unwrap() > 0);
    assert_eq!(ddb(&["circuits", "--n", "0", "--label", "B1"]).status.code(), Some(2));
    assert_eq!(ddb(&["circuits", "--n", "2", "--label", "B4"]).status.code(), Some(2));
    assert_eq!(ddb(&["circuits", "--n", "2"]).status.code(), Some(2));
}

#[test]
fn element_output() {
    let v = json(&ddb(&["element", "--n", "3", "--j", "2", "--k", "5"]));
    assert_eq!((v["s"].as_u64(), v["shift"].as_u64()), (Some(1), Some(3)));
    assert_eq!(v["measurements"]["phi"]["label"], "B7");
    assert_eq!(v["measurements"]["psi"]["layer"], "YZZ");
    assert_eq!(ddb(&["element", "--n", "2", "--j", "3", "--k", "1"]).status.code(), Some(2));
}

#[test]
fn simulate_then_reconstruct() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("counts.json");
    let truth = dir.path().join("truth.json");
    let c = counts.to_str().unwrap();
    let t = truth.to_str().unwrap();
    stdout(&ddb(&["--seed", "4", "--out", c, "simulate", "--dim", "6", "--rank", "2", "--shots", "20000", "--truth", t]));
    for method in ["direct", "sdp"] {
        let v = json(&ddb(&["reconstruct", "--counts", c, "--method", method, "--truth", t]));
        assert!(v["frobenius"].as_f64().unwrap() < 0.1, "{method}");
        assert_eq!(v["estimate"].as_array().unwrap().len(), 6);
    }
    let v = json(&ddb(&["reconstruct", "--counts", c, "--method", "rank-r", "--rank", "2"]));
    assert_eq!(v["method"], "rank-r");
    assert_eq!(ddb(&["reconstruct", "--counts", c, "--method", "rank-r"]).status.code(), Some(2));
    assert_eq!(ddb(&["reconstruct", "--counts", c, "--method", "mle"]).status.code(), Some(2));
    let named = stdout(&ddb(&["simulate", "--state", "entangled", "--shots", "100"]));
    assert!(named.contains("\"dim\": 6"));
}

#[test]
fn experiment_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"schema":1,"dim":4,"ranks":[1,2],"shots":[200,"exact"],"trials":3,"seed":8,"methods":["direct","rank-r","pauli-cs"]}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let summary = dir.path().join("summary.csv");
    let a = stdout(&ddb(&["experiment", "--config", cfg, "--summary", summary.to_str().unwrap()]));
    let b = stdout(&ddb(&["experiment", "--config", cfg]));
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next().unwrap(), "d,r,method,shots,trial,frobenius,fidelity,iters,flags,state,settings,projectors");
    assert_eq!(lines.count(), 2 * 3 * 2 * 3);
    let s = fs::read_to_string(summary).unwrap();
    assert!(s.starts_with("d,r,state,method,settings,projectors,shots,n,"));
    let other = stdout(&ddb(&["--seed", "9", "experiment", "--config", cfg]));
    assert_ne!(a, other);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"schema":1,"dim":4,"ranks":[1],"shots":[10],"trials":0,"seed":1,"methods":["direct"]}"#).unwrap();
    assert_eq!(ddb(&["experiment", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn error_sweep_output() {
    let o = ddb(&["--seed", "2", "error-sweep", "--dim", "8", "--eps-grid", "0.01,0.02,0.05,0.1"]);
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 5);
    let err = String::from_utf8(o.stderr).unwrap();
    let slope: f64 = err.trim().strip_prefix("slope ").unwrap().parse().unwrap();
    assert!((slope - 4.0).abs() < 0.5);
    let single = ddb(&["error-sweep", "--dim", "4", "--eps-grid", "0"]);
    let row = stdout(&single).lines().nth(1).unwrap().to_string();
    let e: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!(e <= 1e-9);
    assert!(String::from_utf8(single.stderr).unwrap().contains("no fit"));
    let v = json(&ddb(&["--format", "json", "error-sweep", "--dim", "4", "--eps-grid", "0.1"]));
    assert!(v["slope"].is_null());
}
