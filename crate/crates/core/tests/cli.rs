// Copyright 2026 The cavityduo Authors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end runs of the `cavityduo` binary. Set `UPDATE_GOLDEN=1` to
//! rewrite the golden trajectory after an intended output change.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn manifest_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn cavityduo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavityduo"))
        .args(args)
        .current_dir(manifest_dir())
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    manifest_dir().join("configs").join(name).display().to_string()
}

fn golden_config() -> String {
    manifest_dir().join("tests/golden/small_cat.json").display().to_string()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn run_into(dir: &Path, args: &[&str]) -> Output {
    let mut all = args.to_vec();
    let out = dir.display().to_string();
    all.extend(["--out", &out]);
    cavityduo(&all)
}

#[test]
fn golden_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), &["evolve-cat", "--config", &golden_config()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let produced = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let golden_path: PathBuf = manifest_dir().join("tests/golden/small_cat_trajectory.csv");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden_path, &produced).unwrap();
    }
    let golden = std::fs::read_to_string(&golden_path).expect("golden file present (run with UPDATE_GOLDEN=1)");
    assert_eq!(produced, golden);
    assert_eq!(produced.lines().count(), 1 + 11);
}

#[test]
fn identical_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let out = run_into(dir.path(), &["evolve-cat", "--config", &golden_config(), "--seed", "7", "--snapshot"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for file in ["trajectory.csv", "final_state.csv"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file} differs");
    }
}

#[test]
fn algebra_check_reports_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), &["algebra-check", "--config", &config("algebra_check.json")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(!report.is_empty());
}

#[test]
fn missing_config_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), &["evolve-coherent", "--config", "does/not/exist.json"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{ "params": { "omega_a": 1, "omega_b": 1, "g": 0 }, "bogus": 1 }"#).unwrap();
    let out = run_into(dir.path(), &["evolve-coherent", "--config", &bad.display().to_string()]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let out = run_into(
        dir.path(),
        &["evolve-coherent", "--config", &config("weak_coupling.json"), "--override", "dim_a=3"],
    );
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn verify_tolerance_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(
        dir.path(),
        &[
            "verify",
            "--config",
            &config("verify_weak.json"),
            "--override",
            "dt=0.04",
            "--override",
            "sample_every=5",
            "--override",
            "allow_large_step=true",
        ],
    );
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(dir.path().join("report.txt").exists());
}

#[test]
fn positivity_violation_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(
        dir.path(),
        &[
            "evolve-coherent",
            "--config",
            &config("weak_coupling.json"),
            "--override",
            "coeffs.k_aa=0.1",
            "--override",
            "coeffs.k_bb=0.1",
            "--override",
            "coeffs.k_ab=1.0",
            "--override",
            "coeffs.k_ba=1.0",
            "--override",
            "v_a=[0.5,0]",
            "--override",
            "v_b=[0,0]",
            "--override",
            "dim_a=10",
            "--override",
            "dim_b=10",
        ],
    );
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).contains("positivity"));
}
