use std::collections::BTreeSet;
use std::process::{Command, Output};

use serde_json::Value;

use permq::circuit::Circuit;
use permq::perm::Permutation;
use permq::sim::{circuit_unitary, UnitaryMatrix};

fn permq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permq")).args(args).output().unwrap()
}

fn ok_lines(args: &[&str]) -> Vec<Value> {
    let out = permq(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn error_kind(args: &[&str]) -> String {
    let out = permq(args);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].is_string());
    err["kind"].as_str().unwrap().to_string()
}

#[test]
fn enumerate() {
    let lines = ok_lines(&["enumerate", "--n", "3"]);
    let labels: Vec<&str> = lines.iter().map(|l| l["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["I", "s1", "s1 s0", "s0", "s0 s1", "s0 s1 s0"]);
    assert_eq!(ok_lines(&["enumerate", "--n", "2"]).len(), 2);
    let five: BTreeSet<String> = ok_lines(&["enumerate", "--n", "5"]).iter().map(|l| l["perm"].to_string()).collect();
    assert_eq!(five.len(), 120);
    assert_eq!(ok_lines(&["enumerate", "--n", "4", "--limit", "5"]).len(), 5);
    assert_eq!(error_kind(&["enumerate", "--n", "11"]), "resource");
}

#[test]
fn decompose() {
    let out = ok_lines(&["decompose", "--perm", "[3,2,0,1]"]);
    assert_eq!(out[0]["word"], serde_json::json!([1, 0, 2, 1, 0]));
    let out = ok_lines(&["decompose", "--perm", "[0,1,2]"]);
    assert_eq!(out[0]["word"], serde_json::json!([]));
    assert_eq!(error_kind(&["decompose", "--perm", "[0,0,1]"]), "validation");
}

#[test]
fn sample_is_reproducible_and_restrictable() {
    let a = permq(&["sample", "--n", "4", "--count", "50", "--seed", "7"]);
    let b = permq(&["sample", "--n", "4", "--count", "50", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, permq(&["sample", "--n", "4", "--count", "50", "--seed", "8"]).stdout);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("restrict.json");
    std::fs::write(
        &path,
        r#"{"N":4,"slots":[{"k":0,"mode":"pinned","pin":0},{"k":1,"mode":"barred"},{"k":2,"mode":"barred"}]}"#,
    )
    .unwrap();
    let lines =
        ok_lines(&["sample", "--n", "4", "--count", "300", "--seed", "1", "--restrict", path.to_str().unwrap()]);
    let seen: BTreeSet<&str> = lines.iter().map(|l| l["label"].as_str().unwrap()).collect();
    let want: BTreeSet<&str> =
        ["s1 s2", "s1 s2 s1", "s1 s2 s1 s0", "s1 s0 s2", "s1 s0 s2 s1", "s1 s0 s2 s1 s0"].into_iter().collect();
    assert_eq!(seen, want);

    std::fs::write(&path, r#"{"N":4,"slots":[{"k":1,"mode":"pinned","pin":5}]}"#).unwrap();
    assert_eq!(
        error_kind(&["sample", "--n", "4", "--count", "1", "--seed", "1", "--restrict", path.to_str().unwrap()]),
        "invalid_restriction"
    );
}

#[test]
fn synth() {
    let out = ok_lines(&["synth", "--word", "[5]", "--qubits", "3"]);
    let gates = out[0]["gates"].as_array().unwrap();
    assert_eq!(gates.len(), 3);
    assert_eq!(gates[0]["kind"], "cx");
    assert_eq!(gates[1]["pattern"], "11");

    let out = ok_lines(&["synth", "--word", "[]", "--qubits", "2"]);
    assert_eq!(out[0]["gates"], serde_json::json!([]));

    let raw: Circuit =
        serde_json::from_value(ok_lines(&["synth", "--word", "s4 s2", "--qubits", "3"])[0].clone()).unwrap();
    let low: Circuit =
        serde_json::from_value(ok_lines(&["synth", "--word", "s4 s2", "--qubits", "3", "--lower"])[0].clone()).unwrap();
    assert!(low.is_lowered());
    assert_eq!(circuit_unitary(&raw).unwrap().max_abs_diff(&circuit_unitary(&low).unwrap()), 0.0);

    assert_eq!(error_kind(&["synth", "--word", "[4]", "--qubits", "3", "--qasm"]), "must_lower");
    let qasm = permq(&["synth", "--word", "[4]", "--qubits", "3", "--qasm", "--lower"]);
    assert!(String::from_utf8(qasm.stdout).unwrap().starts_with("OPENQASM 3.0;"));
    assert_eq!(error_kind(&["synth", "--word", "[7]", "--qubits", "3"]), "range");
}

#[test]
fn decompose_synth_simulate_round_trip() {
    for (n, perm) in [(2, "[2,0,3,1]"), (3, "[7,0,5,2,6,1,4,3]"), (4, "[15,3,9,0,12,5,1,14,2,8,11,4,13,6,10,7]")] {
        let word = ok_lines(&["decompose", "--perm", perm])[0]["word"].to_string();
        let circuit: Circuit =
            serde_json::from_value(ok_lines(&["synth", "--word", &word, "--qubits", &n.to_string()])[0].clone())
                .unwrap();
        let p = Permutation::new(serde_json::from_str(perm).unwrap()).unwrap();
        let gap = circuit_unitary(&circuit).unwrap().max_abs_diff(&UnitaryMatrix::permutation_matrix(&p));
        assert!(gap <= 1e-12, "{perm}");
    }
}

#[test]
fn randtest() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    std::fs::write(&csv, "1\n2\n3\n4\n5\n6\n7\n8\n").unwrap();
    let csv = csv.to_str().unwrap();
    let report = &ok_lines(&["randtest", "--data", csv, "--m", "2", "--shots", "5000", "--seed", "4", "--exact"])[0];
    let class = report["classes"].as_array().unwrap().iter().find(|c| c["key"] == serde_json::json!([3, 7])).unwrap();
    assert!((class["mean_hat"].as_f64().unwrap() - 6.0).abs() < 1e-12);
    assert_eq!(report["seed"], 4);

    let uniform = dir.path().join("u.json");
    std::fs::write(&uniform, "[2,2,2,2,2,2,2,2]").unwrap();
    let report = &ok_lines(&[
        "randtest",
        "--data",
        uniform.to_str().unwrap(),
        "--m",
        "1",
        "--shots",
        "4000",
        "--seed",
        "2",
        "--tail",
        "ge",
        "--n",
        "3",
    ])[0];
    assert_eq!(report["tail"], "ge");
    for c in report["classes"].as_array().unwrap() {
        let p = c["p_hat"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }

    let args = ["randtest", "--data", csv, "--m", "2", "--shots", "5000", "--seed", "4", "--t-star", "-1.5"];
    assert_eq!(ok_lines(&args)[0]["t_star"], -1.5);
    assert_eq!(error_kind(&["randtest", "--data", csv, "--m", "3", "--shots", "10", "--seed", "1"]), "domain");
    assert_eq!(
        error_kind(&["randtest", "--data", csv, "--m", "2", "--shots", "10", "--seed", "1", "--n", "4"]),
        "size_mismatch"
    );
}

#[test]
fn corona() {
    let g = &ok_lines(&["corona", "--n", "4"])[0];
    assert_eq!(g["n_vertices"], 24);
    assert_eq!(g["n_edges"], 37);
    let g = &ok_lines(&["corona", "--n", "3"])[0];
    let labels: Vec<&str> = g["vertices"].as_array().unwrap().iter().map(|v| v["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["I", "s0", "s1", "s1 s0", "s0 s1", "s0 s1 s0"]);
    let dot = String::from_utf8(permq(&["corona", "--n", "2", "--dot"]).stdout).unwrap();
    assert_eq!(dot.matches(" -- ").count(), 1);
    assert_eq!(error_kind(&["corona", "--n", "1"]), "domain");
}

#[test]
fn usage_errors_are_json() {
    assert_eq!(error_kind(&["enumerate", "--n", "3", "--bogus"]), "usage");
    assert_eq!(error_kind(&["frobnicate"]), "usage");
}
