//! End-to-end checks of the binary: exit codes, determinism, artifact shape.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gibbslab"))
}

#[test]
fn help_exits_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("gibbs-check"));
}

#[test]
fn gibbs_check_reports_tiny_residual() {
    let out = bin()
        .args(["gibbs-check", "--grid", "2x2", "--b-seed", "7", "--beta", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn malformed_circuit_file_exits_two() {
    let dir = std::env::temp_dir().join("gibbslab-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.circ");
    std::fs::write(&path, "qubits 2\nH 0\nFROB 1\n").unwrap();
    let out = bin()
        .args(["gibbs-check", "--circuit", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn capacity_error_exits_one() {
    // a 4x4 grid (16 qubits) exceeds the dense superoperator budget upstream
    let out = bin()
        .args(["davies", "--grid", "4x4", "--beta", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identical_config_gives_byte_identical_json() {
    let run = || {
        bin()
            .args([
                "repcode", "--grid", "2x1", "--rep", "3", "--p-in", "0.05", "--p-out", "0.05",
                "--seed", "9", "--samples", "2000",
            ])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn distill_sweep_csv_has_expected_columns() {
    let out = bin()
        .args([
            "distill-sweep",
            "--gadget",
            "3,2",
            "--trials",
            "2000",
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("B,D,p,exact_rate,mc_rate,stderr,trials"));
    assert_eq!(text.lines().count(), 7); // header + 6 noise rates
}

#[test]
fn verify_negative_control_fails_loudly() {
    let ok = bin().arg("verify").output().unwrap();
    assert!(ok.status.success());
    let bad = bin()
        .args(["verify", "--inject-weight-sign-bug"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| !c["pass"].as_bool().unwrap())
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, vec!["detailed_balance"]);
}
