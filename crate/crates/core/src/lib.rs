//! Jackknife empirical likelihood inference for Gini correlations.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod distributions;
pub mod el;
pub mod error;
pub mod inference;
pub mod jackknife;
pub mod kernels;
pub mod simstudy;
pub mod special;
pub mod ustat;

#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
pub use kernels::{BivariateObs, BivariateSample};
pub use ustat::Orientation;
