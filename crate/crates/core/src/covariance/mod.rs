//! Stationary covariance `R(k, l) = Cov(X(k, l), X(0, 0))` of the planar AR field.
//!
//! Four independent evaluation routes are provided:
//!
//! * [`cov_closed`]: geometric closed form off the main quadrant, and an exact
//!   finite reduction onto the `d = 0` anti-diagonal inside it;
//! * [`cov_f4`]: Appell `F4` double series with integer parameters;
//! * [`cov_binrep`]: mixture of sums of two independent binomials (only `k * l >= 0`);
//! * [`cov_series_oracle`]: brute-force inner product of the moving-average weights
//!   of the stationary solution, truncated with an a priori tail bound.
//!
//! [`CovKernel`] wraps one of them with a per-parameter cache.

mod binrep;
mod closed;
mod f4;
mod kernel;
mod series;

pub use binrep::{binom_pmf, cov_binrep, pmf_s};
pub use closed::{cov_closed, cov_equal_coefficients};
pub use f4::{cov_f4, f4_series};
pub use kernel::{CovKernel, CovMethod};
pub use series::{cov_series_oracle, margin_for_tolerance, tail_variance_bound};

use crate::error::Result;
use crate::model::ModelParams;

/// Stationary variance `R(0, 0)`:
/// `((1+a+b)(1+a-b)(1-a+b)(1-a-b))^(-1/2)`.
pub fn sigma_sq(p: ModelParams) -> Result<f64> {
    p.check_stationary()?;
    Ok(1.0 / inverse_sigma_sq(p))
}

fn inverse_sigma_sq(p: ModelParams) -> f64 {
    let (a, b) = (p.alpha, p.beta);
    ((1.0 + a + b) * (1.0 + a - b) * (1.0 - a + b) * (1.0 - a - b)).sqrt()
}

/// Correlation constant of the Fisher-information matrix `Gamma`;
/// zero when either coefficient vanishes.
pub fn rho_corr(p: ModelParams) -> Result<f64> {
    let s2 = sigma_sq(p)?;
    let (a, b) = (p.alpha, p.beta);
    if a * b == 0.0 {
        return Ok(0.0);
    }
    Ok(((1.0 - a * a - b * b) * s2 - 1.0) / (2.0 * a * b * s2))
}

/// `(sigma^2, f, g)` with `R(k, l) = sigma^2 f^|k| g^|l|` whenever `k * l <= 0`.
///
/// `f = (1 + a^2 - b^2 - sigma^-2) / (2a)` is evaluated as the algebraically equal
/// `2a / (1 + a^2 - b^2 + sigma^-2)`, which has no cancellation and stays valid at `a = 0`.
pub(crate) fn base_factors(p: ModelParams) -> Result<(f64, f64, f64)> {
    p.check_stationary()?;
    let (a, b) = (p.alpha, p.beta);
    let inv = inverse_sigma_sq(p);
    let f = 2.0 * a / (1.0 + a * a - b * b + inv);
    let g = 2.0 * b / (1.0 + b * b - a * a + inv);
    Ok((1.0 / inv, f, g))
}

/// Correlation of the two regressors `X(k-1, l)` and `X(k, l-1)`: `R(1, -1) / sigma^2 = f g`.
pub fn regressor_correlation(p: ModelParams) -> Result<f64> {
    let (_, f, g) = base_factors(p)?;
    Ok(f * g)
}
