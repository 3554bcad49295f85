//! The critical-regime delay constant.
//!
//! For `m ~ beta ln n` the mean delay grows like `alpha n ln n`, where `alpha`
//! is the unique root on `(beta, inf)` of
//!
//! ```text
//! alpha - beta ln(alpha) = beta - beta ln(beta) + 1.
//! ```
//!
//! Writing `alpha = beta (1 + u)` turns this into `u - ln(1 + u) = 1/beta`.
//! The solver works with `u`, which keeps the residual free of the
//! cancellation between `alpha` and `beta ln(alpha)` when `beta` is large.

use serde::Serialize;

use crate::error::{Error, Result};

const MAX_ITERATIONS: u32 = 200;
const RESIDUAL_TOL: f64 = 1e-12;
const STEP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaSolution {
    pub beta: f64,
    pub alpha: f64,
    /// `alpha - beta ln(alpha) - (beta - beta ln(beta) + 1)`.
    pub residual: f64,
    pub iterations: u32,
}

/// `u - ln(1 + u)` without cancellation near zero.
fn excess_over_log1p(u: f64) -> f64 {
    if u.abs() < 0.05 {
        let mut power = u * u;
        let mut sum = 0.0;
        for k in 2..40 {
            let term = power / k as f64;
            if k % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            power *= u;
        }
        sum
    } else {
        u - u.ln_1p()
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("beta must be a positive finite real, got {beta}")));
    }
    Ok(())
}

/// Solves for `u = alpha/beta - 1`; returns `(u, residual, iterations)`.
fn solve_relative_excess(beta: f64) -> Result<(f64, f64, u32)> {
    let target = 1.0 / beta;
    let eq = |u: f64| excess_over_log1p(u) - target;

    // alpha in [beta + 1, beta + 1 + sqrt(2 beta) + 2 + 1/beta]
    let mut lo = 1.0 / beta;
    let mut hi = (3.0 + (2.0 * beta).sqrt() + 1.0 / beta) / beta;
    while eq(hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::numeric("failed to bracket alpha", None));
        }
    }

    let mut u = (2.0 / beta).sqrt().clamp(lo, hi);
    let mut last_step = f64::INFINITY;
    for iteration in 1..=MAX_ITERATIONS {
        let g = eq(u);
        let residual = beta * g;
        if g < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let alpha = beta * (1.0 + u);
        let step_tol = STEP_TOL * (1.0 + alpha);
        let converged_step = last_step <= step_tol || beta * (hi - lo) <= step_tol;
        if residual.abs() <= RESIDUAL_TOL && (converged_step || residual == 0.0) {
            return Ok((u, residual, iteration));
        }

        let slope = u / (1.0 + u);
        let newton = u - g / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        last_step = beta * (next - u).abs();
        u = next;
    }
    let residual = beta * eq(u);
    Err(Error::numeric(
        format!("alpha solver did not converge for beta = {beta} (residual {residual:e})"),
        Some(beta * (1.0 + u)),
    ))
}

/// Root of `alpha - beta ln(alpha) = beta - beta ln(beta) + 1` on `(beta, inf)`.
pub fn solve_alpha(beta: f64) -> Result<AlphaSolution> {
    check_beta(beta)?;
    let (u, residual, iterations) = solve_relative_excess(beta)?;
    Ok(AlphaSolution {
        beta,
        alpha: beta * (1.0 + u),
        residual,
        iterations,
    })
}

/// `(alpha - beta)/sqrt(beta) - sqrt(2)`, which vanishes as `beta -> inf`.
pub fn bridging_gap(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let (u, _, _) = solve_relative_excess(beta)?;
    Ok(beta.sqrt() * u - std::f64::consts::SQRT_2)
}
