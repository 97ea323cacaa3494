//! Exit-code and output-shape checks for the binary.

use std::process::Command;

fn dncalc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dncalc"))
}

#[test]
fn dn_of_zero_matrix_is_d_cubed() {
    let dir = tempdir();
    let path = dir.join("zero3.json");
    std::fs::write(&path, r#"{"N":3,"a":{}}"#).unwrap();
    let out = dncalc().args(["dn", "--matrix"]).arg(&path).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["operator"], "D^3");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn unsupported_pair_is_a_computation_error() {
    let out = dncalc().args(["verify", "--pair", "9,9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("UnsupportedPair"), "stderr: {err}");
}

#[test]
fn usage_errors_exit_two() {
    // unknown flag: rejected by the argument parser
    let out = dncalc().args(["classify", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // structurally valid flags but a missing required companion flag
    let out = dncalc().args(["qexp", "--object", "phi"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn classify_lists_the_seventeen_pairs() {
    let out = dncalc()
        .args(["classify", "--nmax", "200", "--dmax", "6"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pairs"].as_array().unwrap().len(), 17);
    assert_eq!(v["pairs"][0], serde_json::json!([1, 1]));
}

#[test]
fn verify_single_pair_passes() {
    let out = dncalc()
        .args(["verify", "--pair", "3,1", "--terms", "28"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"], "1/1 pass");
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("dncalc-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
