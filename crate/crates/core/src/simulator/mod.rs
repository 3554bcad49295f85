//! Monte Carlo sampling of the delay.
//!
//! Three samplers are provided:
//!
//! - [`Mode::Discrete`]: draw uniform users until each has `m` packets; the
//!   number of draws is `D`.
//! - [`Mode::Poissonized`]: `Δ = max_j T_j` with `T_j = n Gamma(m, 1)`
//!   independent; cost per replication is `O(n)` regardless of `m`.
//! - [`Mode::Coupled`]: `D` as in the discrete mode, then
//!   `Δ = U_1 + ... + U_D ~ Gamma(D, 1)` with `U_k ~ Exp(1)` independent
//!   of `D`.
//!
//! Replication `i` draws from its own ChaCha stream keyed by `(seed, i)`, and
//! results are collected in replication order, so output is independent of
//! the number of worker threads.

mod export;
mod ks;
mod stats;

pub use export::{format_significant, write_csv};
pub use ks::{kolmogorov_critical_value, kolmogorov_sf, ks_distance, ks_statistic, KSReport};
pub use stats::{
    empirical_moment, empirical_moments, poissonization_identities, Estimate, IdentityCheck,
    Statistic,
};

use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::ProblemSize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Discrete,
    Poissonized,
    Coupled,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Discrete => "discrete",
            Mode::Poissonized => "poissonized",
            Mode::Coupled => "coupled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimConfig {
    pub ps: ProblemSize,
    pub reps: usize,
    pub seed: u64,
    pub mode: Mode,
}

impl SimConfig {
    pub fn new(ps: ProblemSize, reps: usize, seed: u64, mode: Mode) -> Result<Self> {
        let cfg = SimConfig {
            ps,
            reps,
            seed,
            mode,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::domain("reps must be at least 1"));
        }
        if self.ps.n > u32::MAX as u64 || self.ps.m > u32::MAX as u64 {
            return Err(Error::domain("m and n must fit in 32 bits for simulation"));
        }
        Ok(())
    }

    fn expect_mode(&self, mode: Mode) -> Result<()> {
        self.validate()?;
        if self.mode != mode {
            return Err(Error::domain(format!(
                "sampler for {} mode called with a {} config",
                mode.name(),
                self.mode.name()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub d_values: Option<Vec<u64>>,
    pub delta_values: Option<Vec<f64>>,
    pub config: SimConfig,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.d_values
            .as_ref()
            .map(Vec::len)
            .or_else(|| self.delta_values.as_ref().map(Vec::len))
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// RNG for replication `rep`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// One run of the discrete process; `counts` is scratch space of length `n`.
fn discrete_delay<R: Rng>(rng: &mut R, m: u32, users: &Uniform<u32>, counts: &mut [u32]) -> u64 {
    counts.fill(0);
    let mut deficient = counts.len();
    let mut draws = 0u64;
    loop {
        draws += 1;
        let slot = &mut counts[users.sample(rng) as usize];
        *slot += 1;
        if *slot == m {
            deficient -= 1;
            if deficient == 0 {
                return draws;
            }
        }
    }
}

fn user_distribution(n: u64) -> Uniform<u32> {
    Uniform::new(0, n as u32).expect("n >= 1")
}

fn run_discrete(cfg: &SimConfig, with_delta: bool) -> (Vec<u64>, Option<Vec<f64>>) {
    let n = cfg.ps.n as usize;
    let m = cfg.ps.m as u32;
    let users = user_distribution(cfg.ps.n);
    let pairs: Vec<(u64, f64)> = (0..cfg.reps as u64)
        .into_par_iter()
        .map_init(
            || vec![0u32; n],
            |counts, rep| {
                let mut rng = replication_rng(cfg.seed, rep);
                let d = discrete_delay(&mut rng, m, &users, counts);
                let delta = if with_delta {
                    Gamma::new(d as f64, 1.0).expect("shape >= 1").sample(&mut rng)
                } else {
                    0.0
                };
                (d, delta)
            },
        )
        .collect();
    let d = pairs.iter().map(|p| p.0).collect();
    let delta = with_delta.then(|| pairs.iter().map(|p| p.1).collect());
    (d, delta)
}

/// Replicates the discrete collection process.
pub fn sample_discrete(cfg: &SimConfig) -> Result<SampleBatch> {
    cfg.expect_mode(Mode::Discrete)?;
    let (d, _) = run_discrete(cfg, false);
    Ok(SampleBatch {
        d_values: Some(d),
        delta_values: None,
        config: *cfg,
    })
}

/// Replicates `Δ = n max_j G_j`, `G_j ~ Gamma(m, 1)` independent.
pub fn sample_poissonized(cfg: &SimConfig) -> Result<SampleBatch> {
    cfg.expect_mode(Mode::Poissonized)?;
    let n = cfg.ps.n;
    let gamma = Gamma::new(cfg.ps.m as f64, 1.0).expect("shape >= 1");
    let delta: Vec<f64> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(cfg.seed, rep);
            let mut max = 0.0f64;
            for _ in 0..n {
                max = max.max(gamma.sample(&mut rng));
            }
            n as f64 * max
        })
        .collect();
    Ok(SampleBatch {
        d_values: None,
        delta_values: Some(delta),
        config: *cfg,
    })
}

/// Replicates the pair `(D, Δ)` coupled through the interarrival times.
pub fn sample_coupled(cfg: &SimConfig) -> Result<SampleBatch> {
    cfg.expect_mode(Mode::Coupled)?;
    let (d, delta) = run_discrete(cfg, true);
    Ok(SampleBatch {
        d_values: Some(d),
        delta_values: delta,
        config: *cfg,
    })
}

/// Dispatches on `cfg.mode`.
pub fn simulate(cfg: &SimConfig) -> Result<SampleBatch> {
    match cfg.mode {
        Mode::Discrete => sample_discrete(cfg),
        Mode::Poissonized => sample_poissonized(cfg),
        Mode::Coupled => sample_coupled(cfg),
    }
}
