//! Delay analysis for a homogeneous broadcast channel.
//!
//! `D(m, n)` is the number of channel uses needed until each of `n` users has
//! received `m` packets when every use serves a uniformly random user; this is
//! the `m`-fold coupon collector time. The crate provides
//!
//! - stable kernels for the Erlang survival function and its asymptotics
//!   ([`special_fn`]),
//! - the critical-regime constant `alpha(beta)` ([`alpha_solver`]),
//! - exact moments through quadrature of the Poissonized representation, plus
//!   brute-force oracles and leading-order predictors ([`moments`]),
//! - Gumbel-type normalizations for each asymptotic regime ([`limit_laws`]),
//! - reproducible Monte Carlo sampling and goodness-of-fit ([`simulator`]),
//! - the batch command-line front end ([`cli`]).

// NaN must fail domain checks, hence the negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alpha_solver;
pub mod cli;
pub mod error;
pub mod limit_laws;
pub mod moments;
pub mod quadrature;
pub mod simulator;
pub mod special_fn;

pub use error::{Error, Result};
pub use moments::ProblemSize;
