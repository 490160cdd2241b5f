//! Stationary planar autoregressive fields
//! `X(k, l) = alpha X(k-1, l) + beta X(k, l-1) + e(k, l)`:
//! exact covariances by four independent routes, exact simulation on triangular
//! windows, the least-squares estimator, and the nearly-unstable limit laws with a
//! Monte Carlo harness to check them.

// `!(x > 0.0)` is deliberate: NaN must be rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covariance;
pub mod error;
pub mod estimate;
pub mod cli;
pub mod harness;
pub mod io;
pub mod limits;
pub mod linalg;
pub mod mat2;
pub mod model;
pub mod rng;
pub mod simulate;
pub mod sum;

pub use error::{Error, Result};
