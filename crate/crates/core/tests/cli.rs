use std::path::PathBuf;
use std::process::{Command, Output};

fn fracsmooth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracsmooth")).args(args).output().unwrap()
}

fn sweeps_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../sweeps")
}

#[test]
fn norm_of_square_wave_is_one() {
    let out = fracsmooth(&["norm", "--f", r#"{"kind":"sign_sin"}"#, "--p", "0.5,0.75"]);
    assert_eq!(out.status.code(), Some(0));
    let line = String::from_utf8(out.stdout).unwrap();
    let vals: Vec<f64> = line.split_whitespace().map(|v| v.parse().unwrap()).collect();
    assert_eq!(vals.len(), 2);
    assert!(vals.iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn unknown_theorem_suggests_neighbours() {
    let out = fracsmooth(&["verify", "--case", "JACKSN", "--f", r#"{"kind":"sign_sin"}"#, "--p", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("JACKSON"));
}

#[test]
fn help_lists_registry() {
    let out = fracsmooth(&["sweep", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for id in fracsmooth::verifier::registry_ids() {
        assert!(text.contains(id), "{id} missing from help");
    }
}

#[test]
fn missing_function_is_a_usage_error() {
    let out = fracsmooth(&["norm", "--p", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn slope_reads_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pts.csv");
    std::fs::write(&path, "n,e\n1,3\n2,0.75\n4,0.1875\n8,0.046875\n").unwrap();
    let out = fracsmooth(&["slope", "--in", path.to_str().unwrap(), "--x", "n", "--y", "e"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["slope"].as_f64().unwrap() + 2.0).abs() < 1e-12);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("k.csv");
    let cfg = sweeps_dir().join("krotov_slope.json");
    let out = fracsmooth(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--h",
        "0.0625,0.03125,0.015625,0.0078125",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["id"], "KROTOV-SLOPE");
    assert!((summary["slope"].as_f64().unwrap() - 3.0).abs() < 0.05);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.contains("0.0078125"));
}

#[test]
fn config_for_another_command_is_rejected() {
    let cfg = sweeps_dir().join("krotov_slope.json");
    let out = fracsmooth(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
