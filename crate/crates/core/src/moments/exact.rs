//! Brute-force oracles for small instances.
//!
//! Coupons are exchangeable, so the collection process can be tracked as a
//! histogram `h[c]` = number of coupons seen `c` times, with counts capped at
//! `m`. Every non-idle draw moves one coupon from class `c < m` to `c + 1`,
//! so the chain is acyclic apart from self-loops and can be solved by a
//! single sweep in order of progress.

use std::collections::HashMap;

use serde::Serialize;

use super::{Method, MomentResult, ProblemSize};
use crate::error::{Error, Result};

/// Largest admissible number of histogram states.
pub const MAX_STATES: u64 = 1_000_000;

/// Transient mass left when the distribution table is cut off.
pub const TAIL_MASS: f64 = 1e-15;

const MAX_STEPS: usize = 50_000_000;

/// `P{D = k}` for `k = start, start + 1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactDistribution {
    pub start: u64,
    pub probabilities: Vec<f64>,
    /// Probability mass beyond the last tabulated value.
    pub tail_mass: f64,
}

impl ExactDistribution {
    pub fn pmf(&self, k: u64) -> f64 {
        k.checked_sub(self.start)
            .and_then(|i| self.probabilities.get(i as usize))
            .copied()
            .unwrap_or(0.0)
    }

    /// `sum_k k^p P{D = k}` over the tabulated support.
    pub fn raw_moment(&self, power: i32) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| p * ((self.start + i as u64) as f64).powi(power))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.raw_moment(1)
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d = (self.start + i as u64) as f64 - mean;
                p * d * d
            })
            .sum()
    }

    /// `E[g(D)]` over the tabulated support.
    pub fn expect<F: Fn(u64) -> f64>(&self, g: F) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| p * g(self.start + i as u64))
            .sum()
    }
}

struct Chain {
    /// Histogram per state.
    states: Vec<Vec<u32>>,
    /// Outgoing non-idle moves as `(target, probability)`.
    moves: Vec<Vec<(usize, f64)>>,
    /// Probability of an idle draw (a coupon already at the cap).
    idle: Vec<f64>,
    initial: usize,
    absorbing: usize,
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Number of capped-count histograms for `(m, n)`: `C(n + m, m)`.
pub fn state_count(ps: ProblemSize) -> Option<u64> {
    binomial(ps.n.checked_add(ps.m)?, ps.m)
}

fn enumerate(n: u32, classes: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() == classes - 1 {
        prefix.push(n);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for take in 0..=n {
        prefix.push(take);
        enumerate(n - take, classes, prefix, out);
        prefix.pop();
    }
}

fn progress(h: &[u32]) -> u64 {
    h.iter().enumerate().map(|(c, &k)| c as u64 * k as u64).sum()
}

fn build_chain(ps: ProblemSize) -> Result<Chain> {
    match state_count(ps) {
        Some(count) if count <= MAX_STATES => {}
        _ => {
            return Err(Error::domain(format!(
                "state space for m = {}, n = {} exceeds {MAX_STATES} histograms",
                ps.m, ps.n
            )))
        }
    }
    let m = ps.m as usize;
    let n = ps.n as u32;
    let mut states = Vec::new();
    enumerate(n, m + 1, &mut Vec::with_capacity(m + 1), &mut states);
    // Most advanced states first.
    states.sort_by_key(|h| std::cmp::Reverse(progress(h)));
    let index: HashMap<Vec<u32>, usize> = states
        .iter()
        .enumerate()
        .map(|(i, h)| (h.clone(), i))
        .collect();

    let nf = n as f64;
    let mut moves = Vec::with_capacity(states.len());
    let mut idle = Vec::with_capacity(states.len());
    for h in &states {
        let mut out = Vec::new();
        for c in 0..m {
            if h[c] > 0 {
                let mut next = h.clone();
                next[c] -= 1;
                next[c + 1] += 1;
                out.push((index[&next], h[c] as f64 / nf));
            }
        }
        moves.push(out);
        idle.push(h[m] as f64 / nf);
    }
    let mut initial_h = vec![0; m + 1];
    initial_h[0] = n;
    let mut absorbing_h = vec![0; m + 1];
    absorbing_h[m] = n;
    Ok(Chain {
        initial: index[&initial_h],
        absorbing: index[&absorbing_h],
        states,
        moves,
        idle,
    })
}

/// Exact `(E[D], E[D^2])` by a backward sweep over the chain.
pub fn exact_moments_small(ps: ProblemSize) -> Result<(f64, f64)> {
    let chain = build_chain(ps)?;
    let len = chain.states.len();
    let mut first = vec![0.0; len];
    let mut second = vec![0.0; len];
    for i in 0..len {
        if i == chain.absorbing {
            continue;
        }
        let leave = 1.0 - chain.idle[i];
        // Draws spent in state i are Geometric(leave) on {1, 2, ...}.
        let g1 = 1.0 / leave;
        let g2 = (2.0 - leave) / (leave * leave);
        let (mut next1, mut next2) = (0.0, 0.0);
        for &(j, p) in &chain.moves[i] {
            let w = p / leave;
            next1 += w * first[j];
            next2 += w * second[j];
        }
        first[i] = g1 + next1;
        second[i] = g2 + 2.0 * g1 * next1 + next2;
    }
    Ok((first[chain.initial], second[chain.initial]))
}

/// Exact `E[D]` for small instances.
pub fn exact_mean_small(ps: ProblemSize) -> Result<MomentResult> {
    let (mean, _) = exact_moments_small(ps)?;
    Ok(MomentResult {
        value: mean,
        abs_err: 4.0 * f64::EPSILON * mean,
        method: Method::Oracle,
    })
}

/// Exact law of `D` by forward propagation, truncated once the remaining
/// transient mass drops to [`TAIL_MASS`].
pub fn exact_dist_small(ps: ProblemSize) -> Result<ExactDistribution> {
    let chain = build_chain(ps)?;
    let len = chain.states.len();
    let start = ps.m * ps.n;
    let mut mass = vec![0.0; len];
    mass[chain.initial] = 1.0;
    let mut probabilities = Vec::new();
    let mut remaining = 1.0;
    for step in 1..=MAX_STEPS as u64 {
        let mut next = vec![0.0; len];
        let mut absorbed = 0.0;
        for i in 0..len {
            let mu = mass[i];
            if mu == 0.0 {
                continue;
            }
            next[i] += mu * chain.idle[i];
            for &(j, p) in &chain.moves[i] {
                if j == chain.absorbing {
                    absorbed += mu * p;
                } else {
                    next[j] += mu * p;
                }
            }
        }
        mass = next;
        if step >= start {
            probabilities.push(absorbed);
        }
        remaining = mass.iter().sum();
        if remaining <= TAIL_MASS && step >= start {
            return Ok(ExactDistribution {
                start,
                probabilities,
                tail_mass: remaining,
            });
        }
    }
    Err(Error::numeric(
        format!("distribution table did not converge (remaining mass {remaining:e})"),
        None,
    ))
}
