//! Kolmogorov-Smirnov distance between a normalized sample and a limit law.

use serde::Serialize;

use super::SampleBatch;
use crate::error::{Error, Result};
use crate::limit_laws::{normalization, Regime};

/// `sup_y |F_N(y) - F(y)|` for the empirical CDF of `samples`.
///
/// `samples` is sorted in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let count = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let f = cdf(y);
            let above = (i + 1) as f64 / count - f;
            let below = f - i as f64 / count;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov survival function `P{sqrt(N) D_N > x}`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic critical value of the KS statistic at the given level.
pub fn kolmogorov_critical_value(reps: usize, level: f64) -> f64 {
    let (mut lo, mut hi) = (0.2, 5.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_sf(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) / (reps as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSReport {
    pub statistic: f64,
    pub reps: usize,
    pub regime: Regime,
    pub center: f64,
    pub scale: f64,
    /// Asymptotic p-value of the statistic under exact sampling from the limit.
    pub p_value: f64,
}

/// KS distance between the normalized batch and the regime's limit law.
///
/// Uses `D` values when present, `Δ` values otherwise.
pub fn ks_distance(batch: &SampleBatch, regime: &Regime) -> Result<KSReport> {
    let ps = batch.config.ps;
    let norm = normalization(regime, ps)?;
    let mut normalized: Vec<f64> = match (&batch.d_values, &batch.delta_values) {
        (Some(d), _) => d.iter().map(|&d| norm.apply(d as f64)).collect(),
        (None, Some(x)) => x.iter().map(|&x| norm.apply(x)).collect(),
        (None, None) => Vec::new(),
    };
    if normalized.is_empty() {
        return Err(Error::domain("empty sample"));
    }
    let statistic = ks_statistic(&mut normalized, |y| norm.target.cdf(y));
    let reps = normalized.len();
    Ok(KSReport {
        statistic,
        reps,
        regime: *regime,
        center: norm.center,
        scale: norm.scale,
        p_value: kolmogorov_sf(statistic * (reps as f64).sqrt()),
    })
}
