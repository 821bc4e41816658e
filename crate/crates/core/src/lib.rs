#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod detequiv;
pub mod error;
pub mod fixedpoint;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod powalloc;

pub use error::{Error, Result};
