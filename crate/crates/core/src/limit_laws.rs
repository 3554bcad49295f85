//! Affine normalizations of the delay and their limiting laws.
//!
//! Each regime maps a delay sample `d` to `y = (d - center) / scale`. With
//! the normalizations below, `y` is asymptotically standard Gumbel (fixed
//! `m`, supercritical, critical) or distributed as the maximum of `n`
//! independent standard normals (fixed `n`).
//!
//! [`limit_cdf`] gives the limiting law in the form where the additive
//! constant is left out of the normalization, e.g. `exp(-e^{-y}/(m-1)!)`.
//! Such laws are Gumbel laws shifted by a logarithm, see
//! [`Target::GumbelWithLogShift`].

use serde::{Deserialize, Serialize};

use crate::alpha_solver::solve_alpha;
use crate::error::{Error, Result};
use crate::moments::ProblemSize;
use crate::special_fn::{gumbel_cdf, ln_factorial, normal_cdf};

/// `ln(2 sqrt(pi))`.
pub fn ln_two_sqrt_pi() -> f64 {
    (2.0 * std::f64::consts::PI.sqrt()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    /// `m` fixed, `n -> inf`.
    FixedM { m: u64 },
    /// `m >> ln^3 n`.
    Supercritical,
    /// `m = beta ln n + o(sqrt(ln n))`.
    Critical { beta: f64 },
    /// `n` fixed, `m -> inf`.
    FixedN { n: u64 },
}

impl Regime {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Regime::FixedM { m: 0 } => Err(Error::domain("fixed-m regime needs m >= 1")),
            Regime::FixedN { n: 0 } => Err(Error::domain("fixed-n regime needs n >= 1")),
            Regime::Critical { beta } if !(beta > 0.0) || !beta.is_finite() => {
                Err(Error::domain(format!("critical regime needs beta > 0, got {beta}")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::FixedM { .. } => "fixed-m",
            Regime::Supercritical => "super",
            Regime::Critical { .. } => "critical",
            Regime::FixedN { .. } => "fixed-n",
        }
    }
}

/// Law that the normalized delay is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    /// `exp(-e^{-y})`.
    StandardGumbel,
    /// `exp(-e^{-(y - shift)})`.
    GumbelWithLogShift { shift: f64 },
    /// `Φ(y)^n`.
    MaxOfNormals { n: u64 },
}

impl Target {
    pub fn cdf(&self, y: f64) -> f64 {
        match *self {
            Target::StandardGumbel => gumbel_cdf(y),
            Target::GumbelWithLogShift { shift } => gumbel_cdf(y - shift),
            Target::MaxOfNormals { n } => normal_cdf(y).powi(n as i32),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub center: f64,
    pub scale: f64,
    pub target: Target,
}

impl Normalization {
    #[inline]
    pub fn apply(&self, d: f64) -> f64 {
        (d - self.center) / self.scale
    }

    /// Inverse of [`Normalization::apply`].
    pub fn delay_at(&self, y: f64) -> f64 {
        self.center + self.scale * y
    }
}

fn logs_of(n: u64) -> Result<(f64, f64)> {
    if n < 3 {
        return Err(Error::domain(format!("normalization uses ln ln n and needs n >= 3, got n = {n}")));
    }
    let ln_n = (n as f64).ln();
    Ok((ln_n, ln_n.ln()))
}

/// `C = ½ ln(2π (alpha - beta)^2 / beta)`.
pub fn critical_constant(alpha: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !(alpha > beta) {
        return Err(Error::domain(format!(
            "critical constant needs alpha > beta > 0, got alpha = {alpha}, beta = {beta}"
        )));
    }
    let gap = alpha - beta;
    Ok(0.5 * (2.0 * std::f64::consts::PI * gap * gap / beta).ln())
}

/// `b = m / ln n - beta`, the offset of `m` from the exact critical sequence.
pub fn derive_b(m: f64, n: u64, beta: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("derive_b needs n >= 2"));
    }
    Ok(m / (n as f64).ln() - beta)
}

/// Affine map sending the delay to its limiting scale.
///
/// The sizes come from `ps`; the regime only selects the formula (and
/// supplies `beta`). Whether `ps` actually lies in the regime is not checked.
pub fn normalization(regime: &Regime, ps: ProblemSize) -> Result<Normalization> {
    regime.validate()?;
    let nf = ps.n as f64;
    let mf = ps.m as f64;
    match *regime {
        Regime::FixedM { .. } => {
            let (ln_n, ln_ln_n) = logs_of(ps.n)?;
            Ok(Normalization {
                center: nf * (ln_n + (mf - 1.0) * ln_ln_n - ln_factorial(ps.m - 1)),
                scale: nf,
                target: Target::StandardGumbel,
            })
        }
        Regime::Supercritical => {
            let (ln_n, ln_ln_n) = logs_of(ps.n)?;
            let scale = nf * mf / (2.0 * mf * ln_n).sqrt();
            Ok(Normalization {
                center: nf * mf + scale * (2.0 * ln_n - 0.5 * ln_ln_n - ln_two_sqrt_pi()),
                scale,
                target: Target::StandardGumbel,
            })
        }
        Regime::Critical { beta } => {
            let (ln_n, ln_ln_n) = logs_of(ps.n)?;
            let alpha = solve_alpha(beta)?.alpha;
            let b = derive_b(mf, ps.n, beta)?;
            let c = critical_constant(alpha, beta)?;
            // y = ((α-β)/α) m (d/(nm) - α/β) + (b/β) ln n + (ln ln n)/2 + C
            let scale = nf * alpha / (alpha - beta);
            Ok(Normalization {
                center: nf * mf * alpha / beta - scale * (b / beta * ln_n + 0.5 * ln_ln_n + c),
                scale,
                target: Target::StandardGumbel,
            })
        }
        Regime::FixedN { .. } => Ok(Normalization {
            center: nf * mf,
            scale: nf * mf.sqrt(),
            target: Target::MaxOfNormals { n: ps.n },
        }),
    }
}

/// Supercritical normalization in the event form
/// `(d - nm - n sqrt(m) sqrt(2 ln n - ln ln n)) / (n sqrt(m / (2 ln n)))`,
/// whose limit is `exp(-e^{-y} / (2 sqrt(pi)))`.
///
/// Same scale as [`normalization`] for [`Regime::Supercritical`]; the
/// centers differ by a term that vanishes as `n -> inf`, see
/// [`supercritical_form_offset`].
pub fn supercritical_event_normalization(ps: ProblemSize) -> Result<Normalization> {
    let (ln_n, ln_ln_n) = logs_of(ps.n)?;
    let nf = ps.n as f64;
    let mf = ps.m as f64;
    Ok(Normalization {
        center: nf * mf + nf * mf.sqrt() * (2.0 * ln_n - ln_ln_n).sqrt(),
        scale: nf * (mf / (2.0 * ln_n)).sqrt(),
        target: Target::GumbelWithLogShift {
            shift: -ln_two_sqrt_pi(),
        },
    })
}

/// `sqrt(2 ln n) sqrt(2 ln n - ln ln n) - 2 ln n + (ln ln n)/2`.
///
/// The Gumbel-scale statistic equals the event-form statistic plus this
/// offset plus `ln(2 sqrt(pi))`.
pub fn supercritical_form_offset(n: u64) -> Result<f64> {
    let (ln_n, ln_ln_n) = logs_of(n)?;
    Ok((2.0 * ln_n).sqrt() * (2.0 * ln_n - ln_ln_n).sqrt() - 2.0 * ln_n + 0.5 * ln_ln_n)
}

/// Limiting law with the additive constant kept outside the normalization.
pub fn limit_target(regime: &Regime) -> Result<Target> {
    regime.validate()?;
    Ok(match *regime {
        Regime::FixedM { m } => Target::GumbelWithLogShift {
            shift: -ln_factorial(m - 1),
        },
        Regime::Supercritical => Target::GumbelWithLogShift {
            shift: -ln_two_sqrt_pi(),
        },
        Regime::Critical { beta } => {
            let alpha = solve_alpha(beta)?.alpha;
            Target::GumbelWithLogShift {
                shift: -critical_constant(alpha, beta)?,
            }
        }
        Regime::FixedN { n } => Target::MaxOfNormals { n },
    })
}

/// Predicted limiting CDF at `y`:
///
/// - fixed `m`: `exp(-e^{-y} / (m-1)!)`
/// - supercritical: `exp(-e^{-y} / (2 sqrt(pi)))`
/// - critical: `exp(-(1/sqrt(2π)) (sqrt(beta)/(alpha - beta)) e^{-y})`
/// - fixed `n`: `Φ(y)^n`
pub fn limit_cdf(regime: &Regime, y: f64) -> Result<f64> {
    Ok(limit_target(regime)?.cdf(y))
}
