//! End-to-end tests of the `quadsmc` binary: exit codes, file outputs and
//! schema rejection.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_quadsmc")
}

fn config_path(name: &str) -> String {
    format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("quadsmc-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(exe())
        .args(args)
        .output()
        .expect("spawn quadsmc")
}

fn write_config(dir: &Path, name: &str, doc: &serde_json::Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn load_fig3() -> serde_json::Value {
    serde_json::from_str(quadsmc::presets::FIG3_ATTITUDE_JSON).unwrap()
}

#[test]
fn simulate_hover_writes_all_artifacts() {
    let out = scratch("hover");
    let status = run(&[
        "simulate",
        "--config",
        &config_path("hover.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    for file in [
        "log.csv",
        "metrics.json",
        "phi.svg",
        "theta.svg",
        "psi.svg",
        "x.svg",
        "y.svg",
        "z.svg",
        "trajectory_3d.svg",
    ] {
        assert!(out.join(file).exists(), "{file} missing");
    }
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    for ch in ["phi", "theta", "psi", "x", "y", "z"] {
        let ise = metrics[ch]["ise"].as_f64().unwrap();
        assert!(ise < 1e-12, "{ch} ISE = {ise:.3e}");
    }
    let csv = std::fs::read_to_string(out.join("log.csv")).unwrap();
    assert!(csv.starts_with("t,phi,phi_dot,"));
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn simulate_rejects_malformed_json_without_partial_outputs() {
    let dir = scratch("malformed");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out_dir = dir.join("out");
    let status = run(&[
        "simulate",
        "--config",
        bad.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(2));
    assert!(
        !out_dir.exists(),
        "no outputs may be created on a config error"
    );
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn simulate_rejects_unknown_keys() {
    let dir = scratch("unknown-key");
    let mut doc = load_fig3();
    doc["sim"]["typo_key"] = serde_json::json!(1);
    let path = write_config(&dir, "bad.json", &doc);
    let out_dir = dir.join("out");
    let status = run(&[
        "simulate",
        "--config",
        &path,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(2));
    assert!(!out_dir.exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn missing_config_file_is_a_config_error() {
    let status = run(&["check", "--config", "/nonexistent/nowhere.json"]);
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["flynate"]).status.code(), Some(2));
    assert_eq!(
        run(&["simulate", "--config", &config_path("hover.json")])
            .status
            .code(),
        Some(2),
        "simulate without --out"
    );
    assert_eq!(
        run(&[
            "simulate",
            "--config",
            &config_path("hover.json"),
            "--seed",
            "NaN",
            "--out",
            "/tmp/x"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn diverging_run_exits_three_with_partial_log() {
    let dir = scratch("diverge");
    let mut doc = load_fig3();
    doc["gains"] = serde_json::json!({"alpha": 500.0, "k": 900.0, "q": 900.0});
    doc["sim"]["dt"] = serde_json::json!(0.5);
    doc["sim"]["t_end"] = serde_json::json!(50.0);
    let path = write_config(&dir, "diverge.json", &doc);
    let out_dir = dir.join("out");
    let status = run(&[
        "simulate",
        "--config",
        &path,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(3));
    let csv = std::fs::read_to_string(out_dir.join("log.csv")).unwrap();
    assert!(
        csv.lines().count() > 1,
        "partial log must hold at least one row"
    );
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn tune_selftest_finds_the_synthetic_minimum() {
    let dir = scratch("selftest");
    let mut doc = load_fig3();
    doc["tune"] = serde_json::json!({"budget": 200, "selftest": true});
    let path = write_config(&dir, "selftest.json", &doc);
    let out_dir = dir.join("out");
    let status = run(&[
        "tune",
        "--config",
        &path,
        "--out",
        out_dir.to_str().unwrap(),
        "--seed",
        "7",
    ]);
    assert!(status.status.success());
    let best: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("best_gains.json")).unwrap())
            .unwrap();
    let g = best["best_point"][0].as_f64().unwrap();
    assert!((g - 5.0).abs() < 1e-3, "selftest best = {g}");
    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert!(trace.starts_with("eval,value,best_so_far"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn tune_with_zero_budget_is_rejected() {
    let dir = scratch("budget0");
    let mut doc = load_fig3();
    doc["tune"] = serde_json::json!({"budget": 0});
    let path = write_config(&dir, "budget0.json", &doc);
    let out_dir = dir.join("out");
    let status = run(&[
        "tune",
        "--config",
        &path,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn tune_without_tune_block_is_rejected() {
    let dir = scratch("no-tune");
    let out_dir = dir.join("out");
    let status = run(&[
        "tune",
        "--config",
        &config_path("hover.json"),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn tune_short_run_writes_trace_and_gains() {
    let dir = scratch("tune-short");
    let mut doc = load_fig3();
    doc["sim"]["t_end"] = serde_json::json!(1.0);
    doc["tune"] = serde_json::json!({"budget": 12});
    let path = write_config(&dir, "short.json", &doc);
    let out_dir = dir.join("out");
    let status = run(&[
        "tune",
        "--config",
        &path,
        "--out",
        out_dir.to_str().unwrap(),
        "--seed",
        "3",
    ]);
    assert!(status.status.success());
    let best: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("best_gains.json")).unwrap())
            .unwrap();
    assert!(best["gains"]["alpha"][0].as_f64().unwrap() > 0.0);
    assert_eq!(best["evaluations"].as_u64().unwrap(), 12);
    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert_eq!(
        trace.lines().count(),
        13,
        "header plus one line per evaluation"
    );
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn check_passes_on_bundled_configs() {
    for name in ["hover.json", "fig3_attitude.json", "fig7_position.json"] {
        let out = run(&["check", "--config", &config_path(name)]);
        assert!(out.status.success(), "{name} check failed");
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert_eq!(stdout.matches(": PASS").count(), 4, "{name}: {stdout}");
    }
}

#[test]
fn check_fails_on_corrupted_constant_override() {
    let dir = scratch("corrupt");
    let mut doc = load_fig3();
    doc["overrides"] = serde_json::json!({"a1": 9.9});
    let path = write_config(&dir, "corrupt.json", &doc);
    let out = run(&["check", "--config", &path]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("dual_form_equivalence: FAIL"), "{stdout}");
    let _ = std::fs::remove_dir_all(&dir);
}
