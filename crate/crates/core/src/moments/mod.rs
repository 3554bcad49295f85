//! Moments of the delay.
//!
//! With `Δ` the Poissonized delay (time at which `n` independent rate-`1/n`
//! Poisson streams have each fired `m` times),
//!
//! ```text
//! E[Δ^s] = s n^s ∫_0^∞ [1 - F_m(τ)^n] τ^{s-1} dτ,     s > 0,
//! E[D (D+1) ... (D+r-1)] = E[Δ^r].
//! ```
//!
//! The integral is evaluated after the change of variables `τ = m ξ`, on
//! `[0, U]` where `U` is the first point at which the remaining tail is
//! negligible.

mod exact;

pub use exact::{
    exact_dist_small, exact_mean_small, exact_moments_small, state_count, ExactDistribution,
    MAX_STATES, TAIL_MASS,
};

use serde::{Deserialize, Serialize};

use crate::alpha_solver::solve_alpha;
use crate::error::{Error, Result};
use crate::limit_laws::Regime;
use crate::quadrature::integrate_adaptive;
use crate::special_fn::{erlang_log_cdf, erlang_log_sf, ln_factorial};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Packets per user `m` and number of users `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemSize {
    pub m: u64,
    pub n: u64,
}

impl ProblemSize {
    pub fn new(m: u64, n: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::domain(format!("m and n must be at least 1 (m = {m}, n = {n})")));
        }
        Ok(ProblemSize { m, n })
    }

    /// `D >= m n` surely.
    pub fn min_delay(&self) -> u64 {
        self.m * self.n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Quadrature,
    Oracle,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentResult {
    pub value: f64,
    pub abs_err: f64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Cut-off on `ln(1 - F_m)` (times the integrand weight) beyond which the
    /// integrand is dropped. `None` means `ln(1e-16 / n)`.
    pub tail_log_threshold: Option<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-9,
            max_subdivisions: 4000,
            tail_log_threshold: None,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadratureConfig {
            rel_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(Error::domain(format!(
                "rel_tol must lie in (0, 1e-2], got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::domain("max_subdivisions must be positive"));
        }
        if let Some(t) = self.tail_log_threshold {
            if !(t < 0.0) {
                return Err(Error::domain("tail_log_threshold must be negative"));
            }
        }
        Ok(())
    }

    pub fn tail_log_threshold_for(&self, n: u64) -> f64 {
        self.tail_log_threshold
            .unwrap_or_else(|| (1e-16f64).ln() - (n as f64).ln())
    }
}

/// `ln(1 - F_m(x)^n)`, accurate at both ends of the transition.
pub fn log_tail(m: u64, n: u64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let log_cdf = erlang_log_cdf(m, x).expect("x > 0, m >= 1").ln();
    let t = n as f64 * log_cdf;
    if t < -0.5 {
        return (-t.exp_m1()).ln();
    }
    // 1 - e^t with t = -a, a = n Q (1 + Q/2 + ...) for small Q = 1 - F.
    let log_sf = erlang_log_sf(m, x).expect("x > 0, m >= 1").ln();
    if log_sf == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let q = log_sf.exp();
    let log_neg_log_cdf = if q < 1e-4 {
        log_sf + (q / 2.0 + q * q / 3.0).ln_1p()
    } else {
        (-log_cdf).ln()
    };
    let log_a = (n as f64).ln() + log_neg_log_cdf;
    let a = log_a.exp();
    if a == 0.0 {
        return log_a;
    }
    log_a + (-(-a).exp_m1() / a).ln()
}

/// Integrates `exp(log_tail(m, n, m ξ) + log_weight(ξ))` over `ξ ∈ [0, ∞)`.
///
/// `peak` is a point beyond which the log-integrand is decreasing.
/// With `power_substitution = Some(s)`, `s < 1`, the variable `v = ξ^s` is
/// used instead and the weight must be omitted (it is absorbed by `dv`).
fn integrate_tail<W: Fn(f64) -> f64>(
    ps: ProblemSize,
    log_weight: W,
    peak: f64,
    power_substitution: Option<f64>,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let (m, n) = (ps.m, ps.n);
    let mf = m as f64;
    let threshold = cfg.tail_log_threshold_for(n);
    let negligible = |xi: f64| {
        erlang_log_sf(m, mf * xi).expect("valid").ln() + log_weight(xi) < threshold
    };

    let mut hi = peak.max(1.0);
    let mut lo = hi;
    let mut guard = 0;
    while !negligible(hi) {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 1100 {
            return Err(Error::numeric("tail truncation search did not terminate", None));
        }
    }
    if hi > lo {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if negligible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-3 * hi {
                break;
            }
        }
    }
    let upper = hi;

    // Breakpoints bracketing the point where n (1 - F_m) = 1.
    let ln_n = (n as f64).ln();
    let crosses = |xi: f64| ln_n + erlang_log_sf(m, mf * xi).expect("valid").ln() < 0.0;
    let mut breaks = vec![0.0];
    if n > 1 && !crosses(0.0) && crosses(upper) {
        let (mut a, mut b) = (0.0, upper);
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if crosses(mid) {
                b = mid;
            } else {
                a = mid;
            }
        }
        let knee = 0.5 * (a + b);
        for point in [0.5 * knee, 0.9 * knee, knee, knee + 0.1 * (upper - knee), knee + 0.5 * (upper - knee)] {
            breaks.push(point);
        }
    } else {
        for k in 1..8 {
            breaks.push(upper * k as f64 / 8.0);
        }
    }
    breaks.push(upper);
    breaks.dedup_by(|b, a| *b <= *a);

    let tail_bound = (n as f64) * threshold.exp() * upper;
    let estimate = match power_substitution {
        None => {
            let f = |xi: f64| (log_tail(m, n, mf * xi) + log_weight(xi)).exp();
            integrate_adaptive(f, &breaks, cfg.rel_tol, 1e-300, cfg.max_subdivisions)
        }
        Some(s) => {
            let vbreaks: Vec<f64> = breaks.iter().map(|b| b.powf(s)).collect();
            let f = |v: f64| log_tail(m, n, mf * v.powf(1.0 / s)).exp();
            integrate_adaptive(f, &vbreaks, cfg.rel_tol, 1e-300, cfg.max_subdivisions)
        }
    }?;
    Ok((estimate.value, estimate.abs_err + tail_bound))
}

fn scale_error(err: Error, factor: f64) -> Error {
    match err {
        Error::Numeric {
            message,
            best_estimate,
        } => Error::Numeric {
            message,
            best_estimate: best_estimate.map(|v| v * factor),
        },
        other => other,
    }
}

/// `E[Δ^s]` for real `s > 0`.
pub fn delta_power_moment(ps: ProblemSize, s: f64, cfg: &QuadratureConfig) -> Result<MomentResult> {
    cfg.validate()?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(format!("moment order must be a positive real, got {s}")));
    }
    let mf = ps.m as f64;
    let scale = (s * ((ps.n as f64).ln() + mf.ln())).exp();
    // Past ξ ≈ 1 the weighted survival decays; the weight shifts this for large s.
    let peak = 1.0 + (s - 1.0).max(0.0) / mf;
    let (value, err, factor) = if s < 1.0 {
        let (v, e) = integrate_tail(ps, |_| 0.0, peak, Some(s), cfg)
            .map_err(|e| scale_error(e, scale))?;
        (v, e, scale)
    } else {
        let factor = s * scale;
        let (v, e) = integrate_tail(ps, |xi: f64| (s - 1.0) * xi.ln(), peak, None, cfg)
            .map_err(|e| scale_error(e, factor))?;
        (v, e, factor)
    };
    Ok(MomentResult {
        value: value * factor,
        abs_err: err * factor,
        method: Method::Quadrature,
    })
}

/// `E[D (D+1) ... (D+r-1)] = E[Δ^r]`.
pub fn rising_moment(ps: ProblemSize, r: u32, cfg: &QuadratureConfig) -> Result<MomentResult> {
    if r == 0 {
        return Err(Error::domain("rising moment order must be at least 1"));
    }
    delta_power_moment(ps, r as f64, cfg)
}

/// `E[D] = E[Δ]`.
pub fn mean_delay(ps: ProblemSize, cfg: &QuadratureConfig) -> Result<MomentResult> {
    rising_moment(ps, 1, cfg)
}

/// `V[D] = V[Δ] - E[Δ] = E[Δ^2] - E[Δ]^2 - E[Δ]`.
///
/// Both moments are integrated three orders of magnitude tighter than
/// `cfg.rel_tol` (floored at `1e-13`) to absorb the cancellation.
pub fn variance_delay(ps: ProblemSize, cfg: &QuadratureConfig) -> Result<MomentResult> {
    cfg.validate()?;
    let tight = QuadratureConfig {
        rel_tol: (cfg.rel_tol * 1e-3).max(1e-13),
        ..*cfg
    };
    let first = rising_moment(ps, 1, &tight)?;
    let second = rising_moment(ps, 2, &tight)?;
    let mean = first.value;
    let raw = second.value - mean * mean - mean;
    let err = second.abs_err
        + (2.0 * mean + 1.0) * first.abs_err
        + 4.0 * f64::EPSILON * second.value;
    if raw < -err {
        return Err(Error::numeric(
            format!("negative variance {raw:e} beyond error budget {err:e}"),
            Some(raw),
        ));
    }
    Ok(MomentResult {
        value: raw.max(0.0),
        abs_err: err,
        method: Method::Quadrature,
    })
}

/// `E[e^{zΔ}] = E[(1 - z)^{-D}] = 1 + z n ∫ [1 - F_m(τ)^n] e^{n z τ} dτ`, `z < 1/n`.
pub fn mgf_delta(ps: ProblemSize, z: f64, cfg: &QuadratureConfig) -> Result<MomentResult> {
    cfg.validate()?;
    let nf = ps.n as f64;
    let mf = ps.m as f64;
    if !z.is_finite() || !(z * nf < 1.0) {
        return Err(Error::domain(format!("mgf argument must satisfy z < 1/n, got z = {z}")));
    }
    if z == 0.0 {
        return Ok(MomentResult {
            value: 1.0,
            abs_err: 0.0,
            method: Method::Quadrature,
        });
    }
    let rate = nf * z * mf;
    let decay = 1.0 - nf * z;
    let peak = ((mf - 1.0) / (mf * decay)).max(1.0);
    let (v, e) = integrate_tail(ps, |xi: f64| rate * xi, 2.0 * peak, None, cfg)?;
    let factor = z * nf * mf;
    Ok(MomentResult {
        value: 1.0 + factor * v,
        abs_err: factor.abs() * e,
        method: Method::Quadrature,
    })
}

/// Newman-Shepp expansion `n ln n + (m-1) n ln ln n + n (γ - ln (m-1)!)`.
pub fn asymptotic_mean_fixed_m(m: u64, n: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("m must be at least 1"));
    }
    if (n as f64) <= std::f64::consts::E {
        return Err(Error::domain(format!("ln ln n needs n > e, got n = {n}")));
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    Ok(nf * ln_n + (m - 1) as f64 * nf * ln_n.ln() + nf * (EULER_GAMMA - ln_factorial(m - 1)))
}

/// Leading-order prediction of the `r`-th rising moment.
///
/// Supercritical and fixed-`n`: `(n m)^r`. Critical: `(alpha(beta) n ln n)^r`.
/// Fixed-`m`: the Newman-Shepp mean raised to the `r`-th power.
pub fn asymptotic_moment(ps: ProblemSize, regime: &Regime, r: u32) -> Result<f64> {
    if r == 0 {
        return Err(Error::domain("moment order must be at least 1"));
    }
    let nf = ps.n as f64;
    let base = match *regime {
        Regime::Supercritical | Regime::FixedN { .. } => nf * ps.m as f64,
        Regime::Critical { beta } => {
            if ps.n < 2 {
                return Err(Error::domain("critical regime needs n >= 2"));
            }
            solve_alpha(beta)?.alpha * nf * nf.ln()
        }
        Regime::FixedM { .. } => asymptotic_mean_fixed_m(ps.m, ps.n)?,
    };
    Ok(base.powi(r as i32))
}

/// Wraps [`asymptotic_moment`] as a [`MomentResult`] with no error estimate.
pub fn asymptotic_moment_result(ps: ProblemSize, regime: &Regime, r: u32) -> Result<MomentResult> {
    Ok(MomentResult {
        value: asymptotic_moment(ps, regime, r)?,
        abs_err: 0.0,
        method: Method::Asymptotic,
    })
}
