//! Solver and diagnostics for the income fluctuation problem with
//! state-dependent discounting, stochastic returns and stochastic income.
//!
//! The crate is organized around the pipeline:
//!
//! 1. [`model`] — specify the problem (exogenous chain plus per-state
//!    distributions of the discount factor, the gross return and income)
//!    and verify the growth-rate conditions that guarantee a solution and
//!    stable wealth dynamics.
//! 2. [`solver`] — compute the optimal consumption policy by time iteration
//!    on the Euler equation.
//! 3. [`dynamics`] — simulate the induced wealth process and run
//!    stationarity / ergodicity / CLT diagnostics.
//! 4. [`tail`] — the theoretical Pareto tail exponent of stationary wealth
//!    and its empirical (Hill) counterpart.
//!
//! [`markov`] holds the underlying chain machinery: Rouwenhorst
//! discretization, stationary distributions, and growth rates as spectral
//! radii.
//!
//! All numerical entry points are deterministic given their seed, and
//! produce bit-identical results regardless of thread count. Build with
//! `--no-default-features` for a fully sequential variant.

// Validation guards are written as `!(x > 0.0)` so NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
mod exec;
pub mod linalg;
pub mod markov;
pub mod model;
pub mod quad;
pub mod rng;
pub mod solver;
pub mod tail;

pub use error::{Error, Result};
