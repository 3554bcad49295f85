//! Numerical kernels for the Erlang(m, 1) law.
//!
//! The survival function `S_m(x) e^{-x} = Γ(m, x) / (m-1)!` underflows long
//! before the arguments the delay analysis needs (`m` up to `10^6`, `x` up to
//! `10^7`), so everything here is computed in the log domain.

use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Natural log of a nonnegative quantity. `-inf` encodes zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogValue(f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);

    pub fn new(log_magnitude: f64) -> Self {
        LogValue(log_magnitude)
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn exp(self) -> f64 {
        self.0.exp()
    }
}

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const FACTORIAL_TABLE_LEN: usize = 171;

fn ln_factorial_table() -> &'static [f64; FACTORIAL_TABLE_LEN] {
    static TABLE: OnceLock<[f64; FACTORIAL_TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0; FACTORIAL_TABLE_LEN];
        let mut prod = 1.0f64;
        for (k, slot) in table.iter_mut().enumerate().skip(1) {
            prod *= k as f64;
            *slot = prod.ln();
        }
        table
    })
}

/// `ln(k!)`: tabulated up to 170, Stirling series beyond.
pub fn ln_factorial(k: u64) -> f64 {
    if (k as usize) < FACTORIAL_TABLE_LEN {
        return ln_factorial_table()[k as usize];
    }
    let x = k as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

fn check_order(m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::domain("Erlang order m must be at least 1"));
    }
    Ok(())
}

fn check_point(x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("argument must be a nonnegative real, got {x}")));
    }
    Ok(())
}

/// `S_m(y) = sum_{l<m} y^l / l!`.
///
/// Direct summation; overflows for large `y` and `m`. Tail computations must
/// go through [`erlang_log_sf`].
pub fn partial_exp_sum(m: u64, y: f64) -> Result<f64> {
    check_order(m)?;
    check_point(y)?;
    let mut term = 1.0;
    let mut sum = 1.0;
    for l in 1..m {
        term *= y / l as f64;
        sum += term;
    }
    Ok(sum)
}

/// Returns `(ln P(m, x), ln Q(m, x))` for the regularized incomplete gamma
/// functions with integer shape `m >= 1`.
fn erlang_log_parts(m: u64, x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    if x == f64::INFINITY {
        return (0.0, f64::NEG_INFINITY);
    }
    if m == 1 {
        return ((-(-x).exp_m1()).ln(), -x);
    }
    let a = m as f64;
    let cap = 10_000 + 100 * a.sqrt() as usize;
    if x <= a + a.sqrt() {
        // P(a, x) = x^a e^{-x} / a! * sum_k x^k / ((a+1)...(a+k))
        let log_prefix = a * x.ln() - x - ln_factorial(m);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..cap {
            term *= x / (a + k as f64);
            sum += term;
            if term < sum * EPS {
                break;
            }
        }
        let ln_p = log_prefix + sum.ln();
        (ln_p, (-ln_p.exp()).ln_1p())
    } else {
        // Modified Lentz evaluation of the continued fraction for Γ(a, x).
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..cap {
            let i = i as f64;
            let an = -i * (i - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        let ln_q = a * x.ln() - x - ln_factorial(m - 1) + h.ln();
        ((-ln_q.exp()).ln_1p(), ln_q)
    }
}

/// `ln(S_m(x) e^{-x})`, the log survival function of Erlang(m, 1).
pub fn erlang_log_sf(m: u64, x: f64) -> Result<LogValue> {
    check_order(m)?;
    check_point(x)?;
    Ok(LogValue(erlang_log_parts(m, x).1))
}

/// `ln F_m(x)`, accurate where `F_m(x)` itself is tiny.
pub fn erlang_log_cdf(m: u64, x: f64) -> Result<LogValue> {
    check_order(m)?;
    check_point(x)?;
    Ok(LogValue(erlang_log_parts(m, x).0))
}

/// `F_m(x) = 1 - S_m(x) e^{-x}`.
pub fn erlang_cdf(m: u64, x: f64) -> Result<f64> {
    Ok(erlang_log_cdf(m, x)?.exp().clamp(0.0, 1.0))
}

/// Tricomi's large-argument expansion of `ln(1 - F_m(x))`, truncated after the
/// `2μ/(x-μ)^3` correction, with Stirling's formula for `(m-1)!`.
///
/// Valid only for `x - m > 0` and `sqrt(m) / (x - m) < 1`.
pub fn tricomi_log_sf(m: u64, x: f64) -> Result<LogValue> {
    check_order(m)?;
    let mf = m as f64;
    let excess = x - mf;
    if !(excess > 0.0) || !(mf.sqrt() / excess < 1.0) {
        return Err(Error::domain(format!(
            "tricomi expansion needs x - m > sqrt(m); got m = {m}, x = {x}"
        )));
    }
    let mu = mf - 1.0;
    let shifted = x - mu;
    let bracket = 1.0 - mu / (shifted * shifted) + 2.0 * mu / (shifted * shifted * shifted);
    let log = -0.5 * (2.0 * PI).ln() - excess + mf * (excess / mf).ln_1p() + 0.5 * mf.ln()
        - (excess + 1.0).ln()
        + bracket.ln();
    Ok(LogValue(log))
}

/// Standard normal CDF.
pub fn normal_cdf(u: f64) -> f64 {
    0.5 * libm::erfc(-u / SQRT_2)
}

/// `|(1 - F_m(x)) - Φ((m - x)/sqrt(m))|`, the Berry-Esseen discrepancy.
pub fn berry_esseen_gap(m: u64, x: f64) -> Result<f64> {
    check_order(m)?;
    if x.is_nan() {
        return Err(Error::domain("x is NaN"));
    }
    let sf = if x <= 0.0 {
        1.0
    } else {
        erlang_log_sf(m, x)?.exp()
    };
    let mf = m as f64;
    Ok((sf - normal_cdf((mf - x) / mf.sqrt())).abs())
}

/// Standard Gumbel CDF `exp(-e^{-y})`.
pub fn gumbel_cdf(y: f64) -> f64 {
    (-(-y).exp()).exp()
}
