//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to stderr
//! (bypassing output capture) before asserting.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use coupon_delay::alpha_solver::solve_alpha;
use coupon_delay::limit_laws::{critical_constant, ln_two_sqrt_pi, Regime};
use coupon_delay::moments::{exact_dist_small, mean_delay, variance_delay, QuadratureConfig};
use coupon_delay::simulator::{
    ks_distance, poissonization_identities, sample_coupled, sample_discrete, sample_poissonized,
    Mode, SimConfig,
};
use coupon_delay::special_fn::{erlang_log_sf, tricomi_log_sf};
use coupon_delay::ProblemSize;

const SEED: u64 = 20261016;

fn report(id: u32, title: &str, pass: bool, elapsed: Duration, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!(
        "{verdict} criterion {id:>2} ({title}) [{:.3} s]: {detail}\n",
        elapsed.as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
}

fn ps(m: u64, n: u64) -> ProblemSize {
    ProblemSize::new(m, n).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn poissonized(m: u64, n: u64, reps: usize) -> SimConfig {
    SimConfig::new(ps(m, n), reps, SEED, Mode::Poissonized).unwrap()
}

#[test]
fn criterion_01_alpha_constant() {
    let start = Instant::now();
    let sol = solve_alpha(1.0).unwrap();
    let elapsed = start.elapsed();
    let pass = (3.1455..=3.1470).contains(&sol.alpha)
        && sol.residual.abs() <= 1e-12
        && elapsed < Duration::from_millis(1);
    report(
        1,
        "alpha(1)",
        pass,
        elapsed,
        &format!("alpha = {:.12}, residual = {:.1e}", sol.alpha, sol.residual),
    );
}

#[test]
fn criterion_02_quadrature_vs_harmonic() {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let mut worst = 0.0f64;
    for n in [2u64, 10, 100, 1000] {
        let harmonic: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
        let v = mean_delay(ps(1, n), &cfg).unwrap().value;
        worst = worst.max(rel(v, n as f64 * harmonic));
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-8 && elapsed < Duration::from_secs(1);
    report(2, "m = 1 mean vs n H_n", pass, elapsed, &format!("max rel err = {worst:.2e}"));
}

#[test]
fn criterion_03_quadrature_vs_brute_force() {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let mut worst_mean = 0.0f64;
    let mut worst_var = 0.0f64;
    for m in 1..=3 {
        for n in 1..=4 {
            let size = ps(m, n);
            let dist = exact_dist_small(size).unwrap();
            let mean = mean_delay(size, &cfg).unwrap().value;
            let var = variance_delay(size, &cfg).unwrap().value;
            worst_mean = worst_mean.max(rel(mean, dist.mean()));
            // n = 1 is degenerate; measure against E[D]^2 there.
            let exact_var = dist.variance();
            let denom = if exact_var > 0.0 { exact_var } else { dist.mean().powi(2) };
            worst_var = worst_var.max((var - exact_var).abs() / denom);
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_mean <= 1e-8 && worst_var <= 1e-8 && elapsed < Duration::from_secs(10);
    report(
        3,
        "m <= 3, n <= 4 vs exact law",
        pass,
        elapsed,
        &format!("max rel err mean = {worst_mean:.2e}, variance = {worst_var:.2e}"),
    );
}

#[test]
fn criterion_04_poissonization_identities() {
    let start = Instant::now();
    let cfg = SimConfig::new(ps(3, 10), 100_000, SEED, Mode::Coupled).unwrap();
    let batch = sample_coupled(&cfg).unwrap();
    let checks = poissonization_identities(&batch).unwrap();
    let elapsed = start.elapsed();
    let detail = checks
        .iter()
        .map(|c| format!("{} z = {:.2}", c.name, c.z_score()))
        .collect::<Vec<_>>()
        .join(", ");
    let pass = checks.len() == 4
        && checks.iter().all(|c| c.z_score() <= 3.0)
        && elapsed < Duration::from_secs(30);
    report(4, "coupled (D, Δ) identities", pass, elapsed, &detail);
}

#[test]
fn criterion_05_supercritical_mean() {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let ratios: Vec<f64> = [50u64, 200, 1000]
        .iter()
        .map(|&n| {
            let m = (n as f64).ln().powi(3).ceil() as u64;
            mean_delay(ps(m, n), &cfg).unwrap().value / (n * m) as f64
        })
        .collect();
    let elapsed = start.elapsed();
    let pass = ratios.windows(2).all(|w| w[1] < w[0])
        && ratios[2] <= 1.25
        && elapsed < Duration::from_secs(60);
    report(
        5,
        "supercritical E[D]/(nm)",
        pass,
        elapsed,
        &format!("ratios = {:.4} > {:.4} > {:.4}", ratios[0], ratios[1], ratios[2]),
    );
}

#[test]
fn criterion_06_critical_mean() {
    let start = Instant::now();
    let n = 10_000u64;
    let m = (n as f64).ln().round() as u64;
    let alpha = solve_alpha(1.0).unwrap().alpha;
    let mean = mean_delay(ps(m, n), &QuadratureConfig::default()).unwrap().value;
    let ratio = mean / (alpha * n as f64 * (n as f64).ln());
    let elapsed = start.elapsed();
    let pass = m == 9 && (0.85..=1.10).contains(&ratio) && elapsed < Duration::from_secs(60);
    report(
        6,
        "critical E[D]/(alpha n ln n)",
        pass,
        elapsed,
        &format!("m = {m}, ratio = {ratio:.4}"),
    );
}

#[test]
fn criterion_07_fixed_m_gumbel_law() {
    let start = Instant::now();
    let regime = Regime::FixedM { m: 2 };
    let poisson = ks_distance(&sample_poissonized(&poissonized(2, 100_000, 5000)).unwrap(), &regime).unwrap();
    let discrete_cfg = SimConfig::new(ps(2, 10_000), 500, SEED, Mode::Discrete).unwrap();
    let discrete = ks_distance(&sample_discrete(&discrete_cfg).unwrap(), &regime).unwrap();
    let elapsed = start.elapsed();
    let pass = poisson.statistic <= 0.05
        && discrete.statistic <= 0.08
        && elapsed < Duration::from_secs(60);
    report(
        7,
        "fixed m = 2 Gumbel law",
        pass,
        elapsed,
        &format!(
            "KS Poissonized n = 1e5: {:.4} (<= 0.05), KS discrete n = 1e4: {:.4} (<= 0.08)",
            poisson.statistic, discrete.statistic
        ),
    );
}

#[test]
fn criterion_08_supercritical_gumbel_law() {
    let start = Instant::now();
    let batch = sample_poissonized(&poissonized(30_000, 1000, 5000)).unwrap();
    let ks = ks_distance(&batch, &Regime::Supercritical).unwrap();
    let elapsed = start.elapsed();
    let pass = ks.statistic <= 0.06 && elapsed < Duration::from_secs(60);
    report(8, "supercritical Gumbel law", pass, elapsed, &format!("KS = {:.4}", ks.statistic));
}

#[test]
fn criterion_09_critical_gumbel_law() {
    let start = Instant::now();
    let n = 1e1f64.exp().round() as u64;
    let batch = sample_poissonized(&poissonized(20, n, 5000)).unwrap();
    let ks = ks_distance(&batch, &Regime::Critical { beta: 2.0 }).unwrap();
    let elapsed = start.elapsed();
    let pass = n == 22026 && ks.statistic <= 0.07 && elapsed < Duration::from_secs(120);
    report(9, "critical Gumbel law", pass, elapsed, &format!("n = {n}, KS = {:.4}", ks.statistic));
}

#[test]
fn criterion_10_tricomi_expansion() {
    let start = Instant::now();
    let mut worst_ratio = 0.0f64;
    for m in [100u64, 1000, 10_000] {
        for t in [5.0, 10.0, 20.0] {
            let mf = m as f64;
            let x = mf + t * mf.sqrt();
            let exact = erlang_log_sf(m, x).unwrap().ln();
            let approx = tricomi_log_sf(m, x).unwrap().ln();
            let bound = 5.0 * (mf / (x - mf).powi(2)).max(1.0 / mf);
            worst_ratio = worst_ratio.max(rel(approx, exact) / bound);
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_ratio <= 1.0 && elapsed < Duration::from_secs(1);
    report(
        10,
        "Tricomi log-sf",
        pass,
        elapsed,
        &format!("max error / bound = {worst_ratio:.2e}"),
    );
}

#[test]
fn criterion_11_bridging() {
    let start = Instant::now();
    let gaps: Vec<f64> = [1e2, 1e4, 1e6]
        .iter()
        .map(|&beta: &f64| (solve_alpha(beta).unwrap().alpha - beta) / beta.sqrt() - 2f64.sqrt())
        .collect();
    let within = [1e2, 1e4, 1e6]
        .iter()
        .zip(&gaps)
        .all(|(&beta, gap): (&f64, &f64)| gap.abs() <= 10.0 * beta.powf(-0.25));
    let monotone = gaps.windows(2).all(|w| w[1].abs() < w[0].abs() && w[0].signum() == w[1].signum());
    let beta = 1e6;
    let c = critical_constant(solve_alpha(beta).unwrap().alpha, beta).unwrap();
    let c_gap = (c - ln_two_sqrt_pi()).abs();
    let elapsed = start.elapsed();
    let pass = within && monotone && c_gap <= 0.01 && elapsed < Duration::from_secs(1);
    report(
        11,
        "bridging to supercritical",
        pass,
        elapsed,
        &format!(
            "gaps = {:.3e}, {:.3e}, {:.3e}; |C - ln 2 sqrt(pi)| = {c_gap:.2e}",
            gaps[0], gaps[1], gaps[2]
        ),
    );
}

#[test]
fn criterion_12_fixed_n_normal_maximum() {
    let start = Instant::now();
    let batch = sample_poissonized(&poissonized(10_000, 3, 5000)).unwrap();
    let ks = ks_distance(&batch, &Regime::FixedN { n: 3 }).unwrap();
    let single_cfg = SimConfig::new(ps(10_000, 1), 20, SEED, Mode::Discrete).unwrap();
    let single = sample_discrete(&single_cfg).unwrap();
    let sure = single.d_values.unwrap().iter().all(|&d| d == 10_000);
    let elapsed = start.elapsed();
    let pass = ks.statistic <= 0.03 && sure && elapsed < Duration::from_secs(30);
    report(
        12,
        "fixed n = 3 law",
        pass,
        elapsed,
        &format!("KS vs Φ^3 = {:.4}, D(m, 1) = m: {sure}", ks.statistic),
    );
}

fn run_cli(args: &[&str], threads: &str) -> Vec<u8> {
    let output = Command::new(env!("CARGO_BIN_EXE_coupon-delay"))
        .args(args)
        .env("COUPON_DELAY_THREADS", threads)
        .output()
        .expect("binary runs");
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    output.stdout
}

#[test]
fn criterion_13_determinism_across_threads() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("samples.csv");
    let csv_arg = csv.to_str().unwrap();
    let simulate = [
        "simulate", "--m", "2", "--n", "40", "--reps", "3000", "--seed", "7", "--mode", "coupled",
        "--out", csv_arg,
    ];
    let limit_check = [
        "limit-check", "--regime", "critical", "--beta", "2", "--m", "6", "--n", "20", "--reps",
        "3000", "--seed", "7", "--mode", "discrete",
    ];
    let mut identical = true;
    let mut reference: Option<(Vec<u8>, Vec<u8>, Vec<u8>)> = None;
    for threads in ["1", "2", "4"] {
        let sim_out = run_cli(&simulate, threads);
        let samples = std::fs::read(&csv).unwrap();
        let check_out = run_cli(&limit_check, threads);
        let current = (sim_out, samples, check_out);
        match &reference {
            None => reference = Some(current),
            Some(r) => identical &= *r == current,
        }
    }
    let elapsed = start.elapsed();
    report(
        13,
        "byte-identical output for 1, 2, 4 workers",
        identical,
        elapsed,
        &format!("identical = {identical}"),
    );
}
