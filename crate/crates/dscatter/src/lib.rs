//! Configuration, parallel Monte Carlo and CSV experiment output for
//! double-scattering multiple-access channels. The numerics live in
//! [`dscatter_core`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod parallel;

pub use error::{CliError, Result};
