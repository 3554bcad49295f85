use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coupon-delay"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn csv_rows(args: &[&str]) -> Vec<Vec<String>> {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("order,value,abs_err,method,asymptotic,ratio"));
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn alpha_command() {
    let v = json(&["alpha", "--beta", "1"]);
    let alpha = v["result"]["alpha"].as_f64().unwrap();
    assert!((alpha - 3.146193).abs() < 1e-6);

    let v = json(&["alpha", "--beta", "10000"]);
    let excess = v["relative_excess"].as_f64().unwrap();
    assert!((excess - 0.01414).abs() < 1e-4, "{excess}");
}

#[test]
fn alpha_rejects_non_positive_beta() {
    for beta in ["0", "-3"] {
        let out = run(&["alpha", "--beta", beta]);
        assert_eq!(out.status.code(), Some(2));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(run(&["alpha"]).status.code(), Some(2));
    assert_eq!(run(&["alpha", "--beta", "x"]).status.code(), Some(2));
}

#[test]
fn moments_command() {
    let value = |rows: &[Vec<String>]| rows[0][1].parse::<f64>().unwrap();
    assert_eq!(value(&csv_rows(&["moments", "--m", "1", "--n", "2", "--orders", "1"])), 3.0);
    assert_eq!(value(&csv_rows(&["moments", "--m", "3", "--n", "1", "--orders", "1"])), 3.0);
    assert_eq!(value(&csv_rows(&["moments", "--m", "1", "--n", "1", "--orders", "2"])), 2.0);

    let rows = csv_rows(&["moments", "--m", "2", "--n", "1000", "--orders", "1,2"]);
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(row[3], "quadrature");
        let ratio: f64 = row[5].parse().unwrap();
        assert!(ratio > 1.0 && ratio < 1.2, "{row:?}");
    }
}

#[test]
fn moments_json_and_errors() {
    let v = json(&[
        "moments", "--m", "9", "--n", "10000", "--orders", "1", "--regime", "critical", "--beta", "1",
        "--format", "json",
    ]);
    let ratio = v["rows"][0]["ratio"].as_f64().unwrap();
    assert!((0.85..=1.10).contains(&ratio));
    assert_eq!(run(&["moments", "--m", "0", "--n", "3"]).status.code(), Some(2));
    assert_eq!(run(&["moments", "--m", "1", "--n", "3", "--rel-tol", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["moments", "--m", "1", "--n", "3", "--regime", "critical"]).status.code(), Some(2));
}

#[test]
fn simulate_single_user() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let v = json(&[
        "simulate", "--m", "5", "--n", "1", "--reps", "3", "--mode", "discrete", "--seed", "1", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(v["summary"]["min_d"], 5);
    assert_eq!(v["summary"]["max_d"], 5);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "d\n5\n5\n5\n");
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let args = [
        "simulate", "--m", "2", "--n", "30", "--reps", "500", "--seed", "7", "--mode", "poissonized",
        "--out", path.to_str().unwrap(),
    ];
    let first_out = run(&args).stdout;
    let first = std::fs::read(&path).unwrap();
    let second_out = run(&args).stdout;
    let second = std::fs::read(&path).unwrap();
    assert_eq!(first, second);
    assert_eq!(first_out, second_out);
    assert!(first.starts_with(b"delta\n"));
    assert!(!first.contains(&b'\r'));
    assert_eq!(first.iter().filter(|&&b| b == b'\n').count(), 501);
}

#[test]
fn simulate_coupled_mean() {
    let v = json(&["simulate", "--m", "1", "--n", "2", "--reps", "100000", "--mode", "coupled", "--seed", "3"]);
    let mean = v["summary"]["mean_d"]["mean"].as_f64().unwrap();
    let se = v["summary"]["mean_d"]["std_error"].as_f64().unwrap();
    assert!((mean - 3.0).abs() <= 3.0 * se, "{mean} ± {se}");
    assert_eq!(v["summary"]["identities"].as_array().unwrap().len(), 4);
}

#[test]
fn randomized_commands_require_seed() {
    assert_eq!(run(&["simulate", "--m", "1", "--n", "2", "--reps", "3"]).status.code(), Some(2));
    assert_eq!(
        run(&["limit-check", "--regime", "super", "--m", "5", "--n", "10", "--reps", "3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["simulate", "--m", "1", "--n", "2", "--reps", "0", "--seed", "1"]).status.code(),
        Some(2)
    );
}

fn ks(args: &[&str]) -> f64 {
    let v = json(args);
    assert!(v["normalization"]["scale"].as_f64().unwrap() > 0.0);
    v["report"]["statistic"].as_f64().unwrap()
}

#[test]
fn limit_check_fixed_m() {
    let d = ks(&["limit-check", "--regime", "fixed-m", "--m", "2", "--n", "100000", "--reps", "5000", "--seed", "11"]);
    assert!(d <= 0.05, "KS = {d}");
}

#[test]
fn limit_check_supercritical() {
    let d = ks(&["limit-check", "--regime", "super", "--m", "30000", "--n", "1000", "--reps", "5000", "--seed", "11"]);
    assert!(d <= 0.06, "KS = {d}");
}

#[test]
fn limit_check_critical() {
    let d = ks(&[
        "limit-check", "--regime", "critical", "--beta", "2", "--m", "20", "--n", "22026", "--reps", "5000",
        "--seed", "11",
    ]);
    assert!(d <= 0.07, "KS = {d}");
}

#[test]
fn limit_check_needs_beta_for_critical() {
    let out = run(&["limit-check", "--regime", "critical", "--m", "20", "--n", "100", "--reps", "10", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
