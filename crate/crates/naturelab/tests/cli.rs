//! End-to-end tests of the command-line interface, driving the real
//! binary via `CARGO_BIN_EXE_naturelab`.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_naturelab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

const BASE_CONFIG: &str = r#"{
  "problem": {
    "label": "pair-1",
    "actions": ["a1", "a2"],
    "states": ["s1", "s2"],
    "payoffs": [[1, 10], [30, 2]]
  },
  "agent": {"kind": "cr_explorer", "delta": 0.5},
  "nature": {"kind": "uniform"},
  "monitoring": "perfect",
  "delta": 0.5,
  "k": 50,
  "horizon": 600,
  "replications": 8,
  "master_seed": 7
}"#;

#[test]
fn k_bound_prints_exact_value() {
    let out = run(&["k-bound", "--delta", "0.5", "--n", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "3906");

    let out = run(&["k-bound", "--delta", "0.2", "--n", "2"]);
    assert_eq!(stdout(&out).trim(), "33198");
}

#[test]
fn k_bound_rejects_bad_delta_with_code_3() {
    let out = run(&["k-bound", "--delta", "1.5", "--n", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("delta"));
}

#[test]
fn unknown_command_is_usage_error() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_trace_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.json", BASE_CONFIG);
    let t1 = dir.path().join("t1.csv");
    let t2 = dir.path().join("t2.csv");
    for t in [&t1, &t2] {
        let out = run(&[
            "simulate",
            "--config",
            &cfg,
            "--out-trace",
            &t.display().to_string(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        assert!(stdout(&out).contains("master_seed: 7"));
    }
    let b1 = std::fs::read(&t1).unwrap();
    let b2 = std::fs::read(&t2).unwrap();
    assert!(!b1.is_empty());
    assert_eq!(b1, b2, "same seed must give byte-identical traces");
    let text = String::from_utf8(b1).unwrap();
    assert!(text.starts_with("t,action,state,payoff,coin,success,N_t\n"));
    assert_eq!(text.lines().count(), 601);
}

#[test]
fn different_seed_changes_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.json", BASE_CONFIG);
    let t1 = dir.path().join("t1.csv");
    let t2 = dir.path().join("t2.csv");
    for (t, seed) in [(&t1, "7"), (&t2, "8")] {
        let out = run(&[
            "simulate",
            "--config",
            &cfg,
            "--seed",
            seed,
            "--out-trace",
            &t.display().to_string(),
        ]);
        assert!(out.status.success());
    }
    assert_ne!(std::fs::read(&t1).unwrap(), std::fs::read(&t2).unwrap());
}

#[test]
fn estimate_reports_are_field_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.json", BASE_CONFIG);
    let report = dir.path().join("report.json");
    let mut captured: Vec<Vec<u8>> = Vec::new();
    for _ in 0..2 {
        let out = run(&[
            "estimate",
            "--config",
            &cfg,
            "--out-report",
            &report.display().to_string(),
            "--jobs",
            "2",
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        assert!(stdout(&out).contains("PASS") || stdout(&out).contains("FAIL"));
        captured.push(std::fs::read(&report).unwrap());
    }
    let mut v1: serde_json::Value = serde_json::from_slice(&captured[0]).unwrap();
    let mut v2: serde_json::Value = serde_json::from_slice(&captured[1]).unwrap();
    v1.as_object_mut().unwrap().remove("wall_time_secs");
    v2.as_object_mut().unwrap().remove("wall_time_secs");
    assert_eq!(v1, v2);
    // audit trail: the report embeds the resolved config and the seed
    assert_eq!(v1["master_seed"], serde_json::json!(7));
    assert_eq!(v1["config"]["delta"], serde_json::json!("0.5"));
    assert_eq!(v1["config"]["problem"]["label"], serde_json::json!("pair-1"));
}

#[test]
fn estimate_without_seed_generates_and_prints_one() {
    let dir = tempfile::tempdir().unwrap();
    let body = BASE_CONFIG.replace(",\n  \"master_seed\": 7", "");
    assert!(!body.contains("master_seed"));
    let cfg = write_config(dir.path(), "exp.json", &body);
    let out = run(&["estimate", "--config", &cfg]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(
        stdout(&out).contains("(generated; pass --seed"),
        "stdout: {}",
        stdout(&out)
    );
}

#[test]
fn monitoring_mismatch_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let body = BASE_CONFIG.replace("\"perfect\"", "\"imperfect\"");
    let cfg = write_config(dir.path(), "exp.json", &body);
    let out = run(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("monitoring"));
}

#[test]
fn mirror_vs_stochastic_agent_exits_with_contract_code() {
    let dir = tempfile::tempdir().unwrap();
    let body = BASE_CONFIG.replace("{\"kind\": \"uniform\"}", "{\"kind\": \"mirror\"}");
    let cfg = write_config(dir.path(), "exp.json", &body);
    let out = run(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(4), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("pure"));
}

#[test]
fn bad_payoff_names_cell_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let body = BASE_CONFIG.replace("[30, 2]", "[30, -2]");
    let cfg = write_config(dir.path(), "exp.json", &body);
    let out = run(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("payoffs[1][1]"), "stderr: {}", stderr(&out));
}

#[test]
fn theoretical_k_resolution_in_config() {
    let dir = tempfile::tempdir().unwrap();
    let body = BASE_CONFIG
        .replace("\"k\": 50", "\"k\": \"theoretical\"")
        .replace("\"horizon\": 600", "\"horizon\": 4000");
    let cfg = write_config(dir.path(), "exp.json", &body);
    let r = dir.path().join("r.json");
    let out = run(&[
        "estimate",
        "--config",
        &cfg,
        "--replications",
        "2",
        "--out-report",
        &r.display().to_string(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&r).unwrap()).unwrap();
    assert_eq!(v["k"], serde_json::json!(3906));
}

#[test]
fn demo_example1_prints_identity_and_min_fraction() {
    let out = run(&["demo-example1", "--horizon", "2000", "--seed", "1"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("N1_T + N2_T = T at every stage: yes"), "stdout: {text}");
    assert!(text.contains("min"), "stdout: {text}");
}

#[test]
fn demo_example2_runs_small() {
    let out = run(&[
        "demo-example2",
        "--horizon",
        "3000",
        "--replications",
        "3",
        "--seed",
        "2",
        "--agent",
        "uniform_random",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("premise"), "stdout: {text}");
    assert!(text.contains("min"), "stdout: {text}");
}

#[test]
fn demo_example2_rejects_bad_params() {
    let out = run(&[
        "demo-example2", "--a", "10", "--b", "20", "--c", "4", "--seed", "1",
        "--horizon", "100", "--replications", "1",
    ]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
}

#[test]
fn out_dir_env_var_prefixes_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "exp.json", BASE_CONFIG);
    let out = bin()
        .args(["simulate", "--config", &cfg, "--out-trace", "sub/trace.csv"])
        .env("NATURELAB_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(dir.path().join("sub/trace.csv").exists());
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest", "--seed", "3"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("all checks passed"));
}
