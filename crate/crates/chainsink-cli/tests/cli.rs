//! End-to-end checks of the command-line interface: exit codes, summary
//! lines, and emitted files.

use std::path::Path;
use std::process::{Command, Output};

fn chainsink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chainsink"))
        .args(args)
        .output()
        .expect("failed to launch chainsink")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn field(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|tok| tok.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("missing {key} in `{line}`"))
        .parse()
        .unwrap()
}

#[test]
fn simulate_single_site_reports_analytic_efficiency() {
    let out = chainsink(&[
        "simulate", "--n", "1", "--lambda", "1", "--gamma", "0", "--big-gamma", "0.5",
        "--gamma-sink", "1", "--scenario", "quantum",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let line = stdout(&out);
    let eta = field(line.trim(), "eta");
    assert!((eta - 0.666667).abs() <= 1e-5, "eta = {eta}");
}

#[test]
fn simulate_rejects_negative_lambda_with_named_message() {
    let out = chainsink(&[
        "simulate", "--n", "2", "--lambda", "-1", "--gamma", "0.25", "--big-gamma", "0.5",
        "--gamma-sink", "1", "--scenario", "quantum",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("lambda"), "stderr: {}", stderr(&out));
}

#[test]
fn simulate_both_reports_near_equal_efficiencies_at_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("traj.csv");
    let out = chainsink(&[
        "simulate", "--n", "3", "--lambda", "0.84", "--gamma", "0.25", "--big-gamma", "0.5",
        "--gamma-sink", "1", "--scenario", "both", "--out", out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let line = stdout(&out);
    let eta_q = field(line.trim(), "eta_q");
    let eta_c = field(line.trim(), "eta_c");
    assert!((eta_q - eta_c).abs() <= 5e-3, "quantum/classical gap too wide");

    for scenario in ["quantum", "classical"] {
        let path = dir.path().join(format!("traj_{scenario}.csv"));
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,p_sink,coherence\n"));
        assert!(text.lines().count() > 10);
    }
}

#[test]
fn simulate_exits_3_when_not_converged() {
    // lambda = Gamma = 0 with N = 2: the excitation never moves
    let out = chainsink(&[
        "simulate", "--n", "2", "--lambda", "0", "--gamma", "0.1", "--big-gamma", "0",
        "--gamma-sink", "1", "--scenario", "quantum", "--t-max", "1.0",
    ]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
}

#[test]
fn find_lambda_qc_locates_the_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("evals.csv");
    let out = chainsink(&[
        "find-lambda-qc", "--n", "3", "--gamma", "0.25", "--big-gamma", "0.5",
        "--gamma-sink", "1", "--bracket", "0.1,2.0", "--points-out", points.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let line = stdout(&out);
    let lqc = field(line.trim(), "lambda_qc");
    assert!((lqc - 0.84).abs() <= 0.05, "lambda_qc = {lqc}");
    let text = std::fs::read_to_string(&points).unwrap();
    assert!(text.starts_with("lambda,eta_diff\n"));
    assert!(text.lines().count() >= 4);
}

#[test]
fn find_lambda_qc_exits_4_for_degenerate_bracket() {
    let out = chainsink(&[
        "find-lambda-qc", "--n", "1", "--gamma", "0.25", "--big-gamma", "0.5",
        "--gamma-sink", "1", "--bracket", "0.1,2.0",
    ]);
    assert_eq!(out.status.code(), Some(4), "stderr: {}", stderr(&out));
}

#[test]
fn reproduce_rejects_unknown_figure_listing_valid_ids() {
    let out = chainsink(&["reproduce", "--figure", "fig17"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("fig2") && err.contains("fig9"), "stderr: {err}");
}

#[test]
fn reproduce_figure_and_rerun_from_meta_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let out = chainsink(&[
        "reproduce", "--figure", "fig4", "--out-dir", dir_a.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let meta = dir_a.path().join("fig4_meta.json");
    assert!(meta.exists());

    let out = chainsink(&[
        "reproduce", "--from-meta", meta.to_str().unwrap(),
        "--out-dir", dir_b.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let a = std::fs::read(dir_a.path().join("fig4_data.csv")).unwrap();
    let b = std::fs::read(dir_b.path().join("fig4_data.csv")).unwrap();
    assert_eq!(a, b, "meta round trip changed the dataset");
}

fn write_single_point_config(path: &Path) {
    std::fs::write(
        path,
        "[base]\nn = 1\nlambda = 1.0\ngamma = 0.0\nbig_gamma = 0.5\ngamma_sink = 1.0\n",
    )
    .unwrap();
}

#[test]
fn sweep_single_point_matches_simulate_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("point.toml");
    let data = dir.path().join("out.csv");
    write_single_point_config(&config);

    let out = chainsink(&[
        "sweep", "--config", config.to_str().unwrap(), "--out", data.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(&data).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "N,omega,lambda,gamma,Gamma,Gamma_s,eta_Q,eta_C,eta_diff,I,C_max,t_Cmax,tau,converged"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(lines.next(), None);
    let eta_q: f64 = row[6].parse().unwrap();

    let sim = chainsink(&[
        "simulate", "--n", "1", "--lambda", "1", "--gamma", "0", "--big-gamma", "0.5",
        "--gamma-sink", "1", "--scenario", "quantum",
    ]);
    let eta_sim = field(stdout(&sim).trim(), "eta");
    assert!((eta_q - eta_sim).abs() <= 1e-6);
}

#[test]
fn sweep_rejects_unknown_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(
        &config,
        "[base]\nn = 1\nlambda = 1.0\ngamma = 0.0\nbig_gamma = 0.5\ngamma_sink = 1.0\nbogus = 3\n",
    )
    .unwrap();
    let out = chainsink(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn dump_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("point.toml");
    write_single_point_config(&config);

    let first = chainsink(&[
        "sweep", "--config", config.to_str().unwrap(), "--dump-config",
    ]);
    assert!(first.status.success());
    let dumped = dir.path().join("dumped.toml");
    std::fs::write(&dumped, stdout(&first)).unwrap();

    let second = chainsink(&[
        "sweep", "--config", dumped.to_str().unwrap(), "--dump-config",
    ]);
    assert!(second.status.success());
    assert_eq!(stdout(&first), stdout(&second), "dump-config is not a fixed point");
}

#[test]
fn usage_error_exits_2() {
    let out = chainsink(&["simulate", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
}
