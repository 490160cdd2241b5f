use statrs::function::factorial::ln_binomial;

use super::base_factors;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Closed-form covariance `R(k, l)`.
///
/// * `k * l <= 0`: `sigma^2 f^|k| g^|l|` (see [`super::base_factors`]).
/// * `k * l > 0`: expand `X(k, l)` by the recursion down to the anti-diagonal
///   `i + j = 0`; innovations above it are independent of `X(0, 0)`, so
///
///   `R(k, l) = sum_{i=-l..=k} C(k+l, k-i) a^(k-i) b^(l+i) R(i, -i)`
///
///   with `R(i, -i) = sigma^2 (f g)^|i|` (for `k, l > 0`; negative pairs use
///   `R(k, l) = R(-k, -l)`). All terms share the sign `sign(a)^k sign(b)^l`.
/// * `a * b = 0`: the field is a stack of independent AR(1) lines.
pub fn cov_closed(p: ModelParams, k: i64, l: i64) -> Result<f64> {
    p.check_stationary()?;
    if p.is_degenerate() {
        return Ok(axis_cov(p, k, l));
    }
    let (s2, f, g) = base_factors(p)?;
    if k.signum() * l.signum() <= 0 {
        return Ok(s2 * f.powi(pow_arg(k)) * g.powi(pow_arg(l)));
    }
    let (k, l) = (k.abs(), l.abs());
    let n = (k + l) as u64;
    let ln_a = p.alpha.abs().ln();
    let ln_b = p.beta.abs().ln();
    let ln_fg = (f * g).abs().ln();
    let ln_s2 = s2.ln();
    let mut sum = 0.0;
    for i in -l..=k {
        let ln_term = ln_binomial(n, (k - i) as u64)
            + (k - i) as f64 * ln_a
            + (l + i) as f64 * ln_b
            + i.unsigned_abs() as f64 * ln_fg
            + ln_s2;
        sum += ln_term.exp();
    }
    let sign = parity_sign(p.alpha, k) * parity_sign(p.beta, l);
    Ok(sign * sum)
}

/// The finite-sum identity
/// `R(k, l) = R(0, |k-l|) - sum_{i < min(|k|,|l|)} C(|k-l|+2i, i) a^i b^(|k-l|+i)`
/// for `k * l >= 0`.
///
/// It only holds when both coefficients are equal (it fails, e.g., at
/// `(0.5, 0.3)`, `(1, 1)` against every other route), so unequal coefficients
/// are rejected.
pub fn cov_equal_coefficients(p: ModelParams, k: i64, l: i64) -> Result<f64> {
    p.check_stationary()?;
    if p.alpha != p.beta {
        return Err(Error::OutOfRange(format!(
            "identity needs alpha == beta, got ({}, {})",
            p.alpha, p.beta
        )));
    }
    if k.signum() * l.signum() < 0 {
        return Err(Error::WrongQuadrant { k, l });
    }
    let d = (k - l).abs();
    let mut r = cov_closed(p, 0, d)?;
    let (a, b) = (p.alpha, p.beta);
    let mut binom = 1.0; // C(d + 2i, i)
    for i in 0..k.abs().min(l.abs()) {
        if i > 0 {
            let (n, r_) = ((d + 2 * i) as f64, i as f64);
            // C(n, i) from C(n - 2, i - 1)
            binom *= n * (n - 1.0) / (r_ * (n - r_));
        }
        r -= binom * a.powi(i as i32) * b.powi((d + i) as i32);
    }
    Ok(r)
}

fn axis_cov(p: ModelParams, k: i64, l: i64) -> f64 {
    let (a, b) = (p.alpha, p.beta);
    if b == 0.0 {
        if l != 0 {
            return 0.0;
        }
        a.powi(pow_arg(k)) / (1.0 - a * a)
    } else {
        if k != 0 {
            return 0.0;
        }
        b.powi(pow_arg(l)) / (1.0 - b * b)
    }
}

fn pow_arg(n: i64) -> i32 {
    i32::try_from(n.unsigned_abs()).unwrap_or(i32::MAX)
}

fn parity_sign(x: f64, n: i64) -> f64 {
    if x < 0.0 && n % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const P: ModelParams = ModelParams::new(0.25, 0.25);

    #[test]
    fn examples() {
        assert_abs_diff_eq!(cov_closed(P, 0, 0).unwrap(), 1.1547005, epsilon = 1e-7);
        assert_abs_diff_eq!(cov_closed(P, 1, -1).unwrap(), 0.0829038, epsilon = 1e-7);
        let s2 = super::super::sigma_sq(P).unwrap();
        assert_abs_diff_eq!(cov_closed(P, 1, 1).unwrap(), s2 - 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(cov_closed(P, 1, 1).unwrap(), 0.1547005, epsilon = 1e-7);
    }

    #[test]
    fn hand_check_off_quadrant() {
        // f = g = 2 - sqrt 3
        let f = 2.0 - 3f64.sqrt();
        let s2 = 0.75f64.powf(-0.5);
        assert_abs_diff_eq!(cov_closed(P, 1, -1).unwrap(), s2 * f * f, epsilon = 1e-15);
        assert_abs_diff_eq!(cov_closed(P, -2, 3).unwrap(), s2 * f.powi(5), epsilon = 1e-15);
    }

    #[test]
    fn axis_models() {
        let p = ModelParams::new(0.5, 0.0);
        assert_abs_diff_eq!(cov_closed(p, 3, 0).unwrap(), 0.125 / 0.75, epsilon = 1e-15);
        assert_eq!(cov_closed(p, 3, 1).unwrap(), 0.0);
        let p = ModelParams::new(0.0, -0.6);
        assert_abs_diff_eq!(cov_closed(p, 0, -3).unwrap(), -0.216 / 0.64, epsilon = 1e-15);
        assert_eq!(cov_closed(ModelParams::new(0.0, 0.0), 0, 0).unwrap(), 1.0);
        assert_eq!(cov_closed(ModelParams::new(0.0, 0.0), 1, 0).unwrap(), 0.0);
    }

    #[test]
    fn axis_limit_is_continuous() {
        // the 1-D branch is the a*b -> 0 limit of the general one
        for &(k, l) in &[(3, 0), (2, 2), (0, 0), (-1, -4), (2, -1)] {
            let near = cov_closed(ModelParams::new(0.5, 1e-9), k, l).unwrap();
            let on = cov_closed(ModelParams::new(0.5, 0.0), k, l).unwrap();
            assert_abs_diff_eq!(near, on, epsilon = 1e-8);
        }
    }

    #[test]
    fn branches_agree_on_axes() {
        // at k * l = 0 the in-quadrant reduction reproduces the product form
        let p = ModelParams::new(0.3, -0.4);
        let (s2, f, g) = base_factors(p).unwrap();
        for k in 1..6i64 {
            let reduced = {
                let mut sum = 0.0;
                for i in 0..=k {
                    let c = (0..(k - i)).fold(1.0, |c, t| c * (k - t) as f64 / (t + 1) as f64);
                    sum += c * p.alpha.powi((k - i) as i32) * p.beta.powi(i as i32)
                        * s2 * (f * g).powi(i as i32);
                }
                sum
            };
            assert_abs_diff_eq!(reduced, cov_closed(p, k, 0).unwrap(), epsilon = 1e-14);
        }
    }

    #[test]
    fn equal_coefficient_identity() {
        for &a in &[0.1, 0.25, -0.45, 0.4] {
            let p = ModelParams::new(a, a);
            for k in -6..=6i64 {
                for l in -6..=6i64 {
                    if k * l < 0 {
                        continue;
                    }
                    let lhs = cov_equal_coefficients(p, k, l).unwrap();
                    assert_abs_diff_eq!(lhs, cov_closed(p, k, l).unwrap(), epsilon = 1e-12);
                }
            }
        }
        let p = ModelParams::new(0.5, 0.3);
        assert!(cov_equal_coefficients(p, 1, 1).is_err());
        // the identity's value differs from the true covariance here
        let wrong = {
            let q = ModelParams::new(0.5, 0.3);
            cov_closed(q, 0, 0).unwrap() - 1.0
        };
        assert!((wrong - cov_closed(p, 1, 1).unwrap()).abs() > 0.05);
    }

    #[test]
    fn rejects_nonstationary() {
        assert!(matches!(
            cov_closed(ModelParams::new(0.6, 0.4), 0, 0),
            Err(Error::NonStationary { .. })
        ));
    }
}
