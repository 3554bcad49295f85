//! Sample means, standard errors and identity checks on simulated batches.

use serde::Serialize;

use super::SampleBatch;
use crate::error::{Error, Result};

/// Sample mean with its standard error `s / sqrt(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    fn from_values<I: IntoIterator<Item = f64>>(values: I) -> Option<Self> {
        let (mut count, mut mean, mut m2) = (0u64, 0.0f64, 0.0f64);
        for x in values {
            count += 1;
            let delta = x - mean;
            mean += delta / count as f64;
            m2 += delta * (x - mean);
        }
        match count {
            0 => None,
            1 => Some(Estimate {
                mean,
                std_error: 0.0,
            }),
            _ => Some(Estimate {
                mean,
                std_error: (m2 / (count - 1) as f64 / count as f64).sqrt(),
            }),
        }
    }
}

/// Per-replication quantity whose mean is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// `D^r`
    DelayPower(u32),
    /// `Δ^r`
    DeltaPower(u32),
    /// `D (D + 1) ... (D + r - 1)`
    DelayRising(u32),
    /// `1 / Δ`
    DeltaReciprocal,
    /// `1 / (D - 1)`; needs `D >= 2` throughout.
    DelayReciprocalShifted,
}

fn delays(batch: &SampleBatch) -> Result<&[u64]> {
    batch
        .d_values
        .as_deref()
        .ok_or_else(|| Error::domain("batch holds no D values"))
}

fn deltas(batch: &SampleBatch) -> Result<&[f64]> {
    batch
        .delta_values
        .as_deref()
        .ok_or_else(|| Error::domain("batch holds no Δ values"))
}

fn rising(d: u64, r: u32) -> f64 {
    (0..r as u64).map(|k| (d + k) as f64).product()
}

fn non_empty(est: Option<Estimate>) -> Result<Estimate> {
    est.ok_or_else(|| Error::domain("empty sample"))
}

/// Estimates `E[stat]` from a batch.
pub fn empirical_moment(batch: &SampleBatch, stat: Statistic) -> Result<Estimate> {
    let est = match stat {
        Statistic::DelayPower(r) => {
            Estimate::from_values(delays(batch)?.iter().map(|&d| (d as f64).powi(r as i32)))
        }
        Statistic::DelayRising(r) => {
            Estimate::from_values(delays(batch)?.iter().map(|&d| rising(d, r)))
        }
        Statistic::DeltaPower(r) => {
            Estimate::from_values(deltas(batch)?.iter().map(|&x| x.powi(r as i32)))
        }
        Statistic::DeltaReciprocal => Estimate::from_values(deltas(batch)?.iter().map(|&x| 1.0 / x)),
        Statistic::DelayReciprocalShifted => {
            let d = delays(batch)?;
            if d.iter().any(|&d| d < 2) {
                return Err(Error::domain("1/(D-1) needs D >= 2"));
            }
            Estimate::from_values(d.iter().map(|&d| 1.0 / (d - 1) as f64))
        }
    };
    non_empty(est)
}

/// Estimates `E[D^r]`, or `E[Δ^r]` when the batch has no `D` values.
pub fn empirical_moments(batch: &SampleBatch, r: u32) -> Result<Estimate> {
    if batch.d_values.is_some() {
        empirical_moment(batch, Statistic::DelayPower(r))
    } else {
        empirical_moment(batch, Statistic::DeltaPower(r))
    }
}

/// An identity `E[lhs] = E[rhs]` tested on a coupled batch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// Estimate of `lhs - rhs` with its standard error.
    pub difference: Estimate,
}

impl IdentityCheck {
    /// `|lhs - rhs|` in standard errors.
    pub fn z_score(&self) -> f64 {
        if self.difference.std_error == 0.0 {
            if self.difference.mean == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.difference.mean.abs() / self.difference.std_error
        }
    }
}

fn paired(name: &'static str, pairs: impl Iterator<Item = (f64, f64)> + Clone) -> Result<IdentityCheck> {
    let lhs = non_empty(Estimate::from_values(pairs.clone().map(|p| p.0)))?;
    let rhs = non_empty(Estimate::from_values(pairs.clone().map(|p| p.1)))?;
    let difference = non_empty(Estimate::from_values(pairs.map(|(a, b)| a - b)))?;
    Ok(IdentityCheck {
        name,
        lhs: lhs.mean,
        rhs: rhs.mean,
        difference,
    })
}

/// Checks the identities linking `D` and `Δ` on a coupled batch:
///
/// - `E[Δ] = E[D]`
/// - `E[Δ^2] = E[D (D + 1)]`
/// - `E[1/Δ] = E[1/(D - 1)]` (only when every `D >= 2`)
/// - `V[D] = V[Δ] - E[Δ]`
///
/// The first three use paired differences. The variance check uses the
/// delta-method influence `(D - μ_D)^2 - (Δ - μ_Δ)^2 + Δ`.
pub fn poissonization_identities(batch: &SampleBatch) -> Result<Vec<IdentityCheck>> {
    let d = delays(batch)?;
    let x = deltas(batch)?;
    if d.len() != x.len() {
        return Err(Error::domain("D and Δ samples differ in length"));
    }
    if d.len() < 2 {
        return Err(Error::domain("need at least two coupled replications"));
    }
    let pairs = || d.iter().zip(x).map(|(&d, &x)| (d as f64, x));
    let mut checks = vec![
        paired("mean", pairs().map(|(d, x)| (x, d)))?,
        paired("second rising", pairs().map(|(d, x)| (x * x, d * (d + 1.0))))?,
    ];
    if d.iter().all(|&d| d >= 2) {
        checks.push(paired(
            "reciprocal",
            pairs().map(|(d, x)| (1.0 / x, 1.0 / (d - 1.0))),
        )?);
    }

    let count = d.len() as f64;
    let mean_d = pairs().map(|p| p.0).sum::<f64>() / count;
    let mean_x = pairs().map(|p| p.1).sum::<f64>() / count;
    let var_d = pairs().map(|p| (p.0 - mean_d).powi(2)).sum::<f64>() / (count - 1.0);
    let var_x = pairs().map(|p| (p.1 - mean_x).powi(2)).sum::<f64>() / (count - 1.0);
    let influence = non_empty(Estimate::from_values(
        pairs().map(|(d, x)| (d - mean_d).powi(2) - (x - mean_x).powi(2) + x),
    ))?;
    checks.push(IdentityCheck {
        name: "variance",
        lhs: var_d,
        rhs: var_x - mean_x,
        difference: Estimate {
            mean: var_d - var_x + mean_x,
            std_error: influence.std_error,
        },
    });
    Ok(checks)
}
