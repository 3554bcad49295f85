//! Batch command-line interface.
//!
//! Commands print JSON records to stdout, except `moments`, which defaults to
//! CSV with columns `order,value,abs_err,method,asymptotic,ratio`. Exit codes:
//! 0 on success, 2 on usage or domain errors, 3 on numeric failures.
//!
//! `COUPON_DELAY_THREADS` caps the number of simulation workers. Output does
//! not depend on it.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::alpha_solver::{bridging_gap, solve_alpha};
use crate::error::{Error, Result};
use crate::limit_laws::{normalization, Regime};
use crate::moments::{asymptotic_moment, rising_moment, ProblemSize, QuadratureConfig};
use crate::simulator::{
    empirical_moment, format_significant, kolmogorov_critical_value, ks_distance,
    poissonization_identities, simulate, write_csv, Mode, SimConfig, Statistic,
};

pub const THREADS_ENV: &str = "COUPON_DELAY_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "coupon-delay", version, about = "Delay of the m-fold coupon collector")]
struct Cli {
    /// Report wall time on stderr.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the critical constant alpha(beta).
    Alpha {
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
    },
    /// Rising moments of D by quadrature, with asymptotic predictions.
    Moments {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        /// Comma-separated moment orders.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        orders: Vec<u32>,
        #[arg(long, default_value_t = 1e-9)]
        rel_tol: f64,
        /// Regime used for the asymptotic prediction.
        #[arg(long, value_enum, default_value_t = RegimeArg::FixedM)]
        regime: RegimeArg,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Draw replications of the delay.
    Simulate {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Discrete)]
        mode: ModeArg,
        /// Write the raw samples here as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Kolmogorov-Smirnov distance between simulated and limiting laws.
    LimitCheck {
        #[arg(long, value_enum)]
        regime: RegimeArg,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        #[arg(long)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Poissonized)]
        mode: ModeArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Discrete,
    Poissonized,
    Coupled,
}

impl From<ModeArg> for Mode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Discrete => Mode::Discrete,
            ModeArg::Poissonized => Mode::Poissonized,
            ModeArg::Coupled => Mode::Coupled,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RegimeArg {
    FixedM,
    Critical,
    Super,
    FixedN,
}

impl RegimeArg {
    fn resolve(self, ps: ProblemSize, beta: Option<f64>) -> Result<Regime> {
        let regime = match self {
            RegimeArg::FixedM => Regime::FixedM { m: ps.m },
            RegimeArg::Super => Regime::Supercritical,
            RegimeArg::FixedN => Regime::FixedN { n: ps.n },
            RegimeArg::Critical => Regime::Critical {
                beta: beta.ok_or_else(|| Error::domain("critical regime needs --beta"))?,
            },
        };
        regime.validate()?;
        Ok(regime)
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_) => EXIT_USAGE,
        Error::Numeric { .. } => EXIT_NUMERIC,
    }
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(k) => Ok(Some(k)),
            Err(_) => Err(Error::domain(format!("{THREADS_ENV} must be a non-negative integer, got {raw:?}"))),
        },
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let started = Instant::now();
    let mut buffer = Vec::new();
    let result = threads_from_env().and_then(|threads| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(k) = threads {
            builder = builder.num_threads(k);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?;
        pool.install(|| execute(&cli.command, &mut buffer))
    });
    let result = result.and_then(|()| out.write_all(&buffer).and_then(|()| out.flush()).map_err(io_error));
    if cli.timing {
        let _ = writeln!(err, "wall_time_seconds: {:.6}", started.elapsed().as_secs_f64());
    }
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::numeric(format!("cannot encode output: {e}"), None))?;
    writeln!(out, "{text}").map_err(io_error)
}

fn io_error(e: std::io::Error) -> Error {
    Error::domain(format!("write failed: {e}"))
}

fn execute(command: &Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Alpha { beta } => cmd_alpha(*beta, out),
        Command::Moments {
            m,
            n,
            orders,
            rel_tol,
            regime,
            beta,
            format,
        } => cmd_moments(ProblemSize::new(*m, *n)?, orders, *rel_tol, *regime, *beta, *format, out),
        Command::Simulate {
            m,
            n,
            reps,
            seed,
            mode,
            out: path,
        } => {
            let cfg = SimConfig::new(ProblemSize::new(*m, *n)?, *reps, *seed, (*mode).into())?;
            cmd_simulate(&cfg, path.as_ref(), out)
        }
        Command::LimitCheck {
            regime,
            m,
            n,
            beta,
            reps,
            seed,
            mode,
        } => {
            let ps = ProblemSize::new(*m, *n)?;
            let regime = regime.resolve(ps, *beta)?;
            let cfg = SimConfig::new(ps, *reps, *seed, (*mode).into())?;
            cmd_limit_check(&cfg, &regime, out)
        }
    }
}

fn cmd_alpha(beta: f64, out: &mut dyn Write) -> Result<()> {
    let solution = solve_alpha(beta)?;
    emit_json(
        out,
        &json!({
            "command": "alpha",
            "parameters": { "beta": beta },
            "result": solution,
            "relative_excess": solution.alpha / beta - 1.0,
            "sqrt_two_over_beta": (2.0 / beta).sqrt(),
            "bridging_gap": bridging_gap(beta)?,
        }),
    )
}

#[derive(Debug, Serialize)]
struct MomentRow {
    order: u32,
    value: f64,
    abs_err: f64,
    method: &'static str,
    asymptotic: Option<f64>,
    ratio: Option<f64>,
}

fn cmd_moments(
    ps: ProblemSize,
    orders: &[u32],
    rel_tol: f64,
    regime: RegimeArg,
    beta: Option<f64>,
    format: Format,
    out: &mut dyn Write,
) -> Result<()> {
    if orders.is_empty() {
        return Err(Error::domain("--orders needs at least one order"));
    }
    let cfg = QuadratureConfig::with_rel_tol(rel_tol);
    let regime = regime.resolve(ps, beta)?;
    let mut rows = Vec::with_capacity(orders.len());
    for &r in orders {
        let moment = rising_moment(ps, r, &cfg)?;
        // Predictions are undefined for some small sizes; leave them blank.
        let asymptotic = asymptotic_moment(ps, &regime, r).ok();
        rows.push(MomentRow {
            order: r,
            value: moment.value,
            abs_err: moment.abs_err,
            method: "quadrature",
            asymptotic,
            ratio: asymptotic.map(|a| moment.value / a),
        });
    }
    match format {
        Format::Json => emit_json(
            out,
            &json!({
                "command": "moments",
                "parameters": { "m": ps.m, "n": ps.n, "rel_tol": rel_tol, "regime": regime },
                "rows": rows,
            }),
        ),
        Format::Csv => {
            let cell = |x: Option<f64>| x.map(|x| format_significant(x, 10)).unwrap_or_default();
            writeln!(out, "order,value,abs_err,method,asymptotic,ratio").map_err(io_error)?;
            for row in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    row.order,
                    format_significant(row.value, 10),
                    format_significant(row.abs_err, 10),
                    row.method,
                    cell(row.asymptotic),
                    cell(row.ratio),
                )
                .map_err(io_error)?;
            }
            Ok(())
        }
    }
}

fn cmd_simulate(cfg: &SimConfig, path: Option<&PathBuf>, out: &mut dyn Write) -> Result<()> {
    let batch = simulate(cfg)?;
    if let Some(path) = path {
        let file = File::create(path)
            .map_err(|e| Error::domain(format!("cannot create {}: {e}", path.display())))?;
        write_csv(&batch, BufWriter::new(file))?;
    }
    let mut summary = serde_json::Map::new();
    if let Some(d) = &batch.d_values {
        summary.insert("mean_d".into(), json!(empirical_moment(&batch, Statistic::DelayPower(1))?));
        summary.insert("min_d".into(), json!(d.iter().min()));
        summary.insert("max_d".into(), json!(d.iter().max()));
    }
    if batch.delta_values.is_some() {
        summary.insert("mean_delta".into(), json!(empirical_moment(&batch, Statistic::DeltaPower(1))?));
    }
    if cfg.mode == Mode::Coupled && cfg.reps >= 2 {
        summary.insert("identities".into(), json!(poissonization_identities(&batch)?));
    }
    emit_json(
        out,
        &json!({
            "command": "simulate",
            "parameters": {
                "m": cfg.ps.m,
                "n": cfg.ps.n,
                "reps": cfg.reps,
                "seed": cfg.seed,
                "mode": cfg.mode,
                "out": path.map(|p| p.display().to_string()),
            },
            "summary": summary,
        }),
    )
}

fn cmd_limit_check(cfg: &SimConfig, regime: &Regime, out: &mut dyn Write) -> Result<()> {
    let norm = normalization(regime, cfg.ps)?;
    let batch = simulate(cfg)?;
    let report = ks_distance(&batch, regime)?;
    emit_json(
        out,
        &json!({
            "command": "limit-check",
            "parameters": {
                "regime": regime.name(),
                "m": cfg.ps.m,
                "n": cfg.ps.n,
                "reps": cfg.reps,
                "seed": cfg.seed,
                "mode": cfg.mode,
            },
            "normalization": norm,
            "report": report,
            "critical_value_99": kolmogorov_critical_value(cfg.reps, 0.01),
        }),
    )
}
