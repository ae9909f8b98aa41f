//! End-to-end tests of the `tshape` binary: output contracts, exit codes,
//! configuration layering, and byte determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tshape(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tshape"))
        .args(args)
        .env_remove("TS_MESH")
        .env_remove("TS_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "expected success, got {:?}; stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn qhat_prints_the_bare_threshold() {
    let out = tshape(&["qhat", "--p", "2", "--r", "2", "--n", "1"]);
    let value: f64 = stdout(&out).trim().parse().expect("a number");
    assert!((value - 7.0).abs() < 1e-12);
}

#[test]
fn scalar_formats_wrap_the_same_value() {
    let csv = stdout(&tshape(&["gamma", "--n", "2", "--p", "2", "--q", "2", "--r", "2", "--format", "csv"]));
    assert_eq!(csv, "key,value\ngamma,4.00000000000e0\n");
    let json = stdout(&tshape(&["gamma", "--n", "2", "--p", "2", "--q", "2", "--r", "2", "--format", "json"]));
    assert_eq!(json, "{\"gamma\":4.00000000000e0}\n");
}

#[test]
fn reduced_minimize_finds_the_symmetric_optimum_below_threshold() {
    let out = stdout(&tshape(&["reduced", "minimize", "--n", "2", "--p", "2", "--r", "3", "--q", "2"]));
    assert!(out.starts_with("key,value\n"));
    let y_line = out.lines().find(|l| l.starts_with("y_star,")).expect("y_star row");
    let y: f64 = y_line.trim_start_matches("y_star,").parse().expect("a number");
    assert!(y.abs() < 1e-6, "expected the symmetric minimizer, got y_star = {y}");
    assert!(out.contains("is_symmetric,true"));
}

#[test]
fn inadmissible_parameters_exit_with_usage_code() {
    // q at the critical exponent p* = 6 in three dimensions is out of range.
    let out = tshape(&["reduced", "minimize", "--n", "3", "--p", "2", "--r", "3", "--q", "6"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn unknown_config_keys_exit_with_usage_code() {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("cfg.json");
    fs::write(&path, "{\"mesh\": 200, \"grid\": 10}").expect("write config");
    let out = tshape(&["--config", path.to_str().unwrap(), "qhat", "--p", "2", "--r", "2", "--n", "1"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown config key"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("cfg.json");
    fs::write(&path, "{\"format\": \"json\"}").expect("write config");
    // The file asks for JSON; the flag wins and the output is CSV.
    let out = stdout(&tshape(&[
        "--config", path.to_str().unwrap(),
        "--format", "csv",
        "qhat", "--p", "2", "--r", "2", "--n", "1",
    ]));
    assert_eq!(out, "key,value\nq_hat,7.00000000000e0\n");
}

#[test]
fn unwritable_output_path_exits_with_usage_code() {
    let out = tshape(&[
        "qhat", "--p", "2", "--r", "2", "--n", "1",
        "--output", "/nonexistent-dir/out.csv",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn sweep_with_no_admissible_points_emits_the_header_only() {
    // Both q values sit below 1, outside the admissible range, so every
    // point is skipped and the table is empty but well-formed.
    let out = tshape(&["reduced", "sweep", "--n", "1", "--p", "2", "--r", "2", "--q-grid", "0.5,0.9"]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "q,y_star,f_star\n");
    assert!(String::from_utf8_lossy(&out.stderr).contains("note:"));
}

#[test]
fn repeated_runs_write_identical_bytes() {
    let dir = tempfile::tempdir().expect("temp dir");
    let run = |name: &str| -> Vec<u8> {
        let path = dir.path().join(name);
        let out = tshape(&[
            "reduced", "sweep", "--n", "1", "--p", "2", "--r", "2",
            "--q-grid", "3:6:7",
            "--output", path.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0);
        assert!(out.stdout.is_empty(), "file output leaves stdout empty");
        fs::read(&path).expect("output file")
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn twoball_solve_emits_profiles_and_matches_the_interval_oracle() {
    let out = stdout(&tshape(&[
        "twoball", "solve", "--n", "1", "--p", "2", "--q", "2", "--r", "3",
        "--t", "0.5", "--mesh", "120",
    ]));
    assert!(out.contains("converged,true"));
    let lambda_line = out.lines().find(|l| l.starts_with("lambda_value,")).expect("lambda row");
    let lambda: f64 = lambda_line.trim_start_matches("lambda_value,").parse().expect("a number");
    assert!(
        (lambda - std::f64::consts::FRAC_PI_2).abs() < 1e-4,
        "unit-interval eigenvalue should be pi/2, got {lambda}"
    );
    assert!(out.contains("ball,radius,value,flux"));
    // Header block, blank separator, then one profile row per node and ball.
    let (header, table) = out.split_once("\n\n").expect("blank separator");
    assert!(header.starts_with("key,value"));
    assert_eq!(table.lines().count() - 1, 2 * 121);
}

#[test]
fn mesh_env_var_fills_in_when_the_flag_is_absent() {
    let out = Command::new(env!("CARGO_BIN_EXE_tshape"))
        .args(["twoball", "solve", "--n", "1", "--p", "2", "--q", "2", "--r", "3", "--t", "0.5"])
        .env("TS_MESH", "110")
        .env_remove("TS_TOL")
        .output()
        .expect("binary runs");
    let text = stdout(&out);
    assert!(text.contains("mesh,110\n"));
}

#[test]
fn verify_filter_runs_the_matching_checks() {
    let out = tshape(&["verify", "--only", "gamma"]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.contains("gamma-qhat-consistency"));
    assert!(text.contains("passed, 0 failed"));
}

#[test]
fn verify_with_an_unmatched_filter_is_a_usage_error() {
    let out = tshape(&["verify", "--only", "no-such-check"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn config_file_must_exist() {
    let missing = Path::new("/nonexistent-dir/cfg.json");
    let out = tshape(&["--config", missing.to_str().unwrap(), "qhat", "--p", "2", "--r", "2", "--n", "1"]);
    assert_eq!(exit_code(&out), 2);
}
