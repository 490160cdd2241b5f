use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::sum::Neumaier;

/// Appell's `F4(a, b, c, d; x, y)` for positive integer parameters,
/// `sum_{m,n} (a)_{m+n} (b)_{m+n} / ((c)_m (d)_n m! n!) x^m y^n`.
///
/// Terms are summed over total degrees `N = m + n <= M`. Since `(c)_m >= m!` and
/// `(d)_n >= n!`, the degree-`N` block is bounded in absolute value by
///
/// `U_N = C(a+N-1, N) C(b+N-1, N) q^(2N)`, `q = sqrt|x| + sqrt|y|`,
///
/// and `U_{N+1} / U_N` is non-increasing in `N`, so the tail past `M` is at most
/// `U_{M+1} / (1 - U_{M+2}/U_{M+1})`. `M` is the first degree where that is below `tol`.
pub fn f4_series(a: u32, b: u32, c: u32, d: u32, x: f64, y: f64, tol: f64) -> Result<f64> {
    if a == 0 || b == 0 || c == 0 || d == 0 {
        return Err(Error::OutOfRange("F4 parameters must be positive".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::OutOfRange(format!("tolerance must be positive, got {tol}")));
    }
    let q = x.abs().sqrt() + y.abs().sqrt();
    if !(q < 1.0 - 4.0 * f64::EPSILON) {
        return Err(Error::Divergent(q));
    }
    if q == 0.0 {
        return Ok(1.0);
    }
    let max_degree = truncation_degree(a, b, q, tol);
    Ok(sum_to_degree(a as f64, b as f64, c as f64, d as f64, x, y, max_degree))
}

fn truncation_degree(a: u32, b: u32, q: f64, tol: f64) -> usize {
    let ln_q2 = 2.0 * q.ln();
    let ln_tol = tol.ln();
    let ratio = |n: u64| {
        let n = n as f64;
        (a as f64 + n) * (b as f64 + n) / ((n + 1.0) * (n + 1.0)) * q * q
    };
    let ln_u = |n: u64| {
        ln_binomial(a as u64 + n - 1, n) + ln_binomial(b as u64 + n - 1, n) + n as f64 * ln_q2
    };
    let mut m: u64 = 0;
    loop {
        let r = ratio(m + 1);
        if r < 1.0 && ln_u(m + 1) - (1.0 - r).ln() < ln_tol {
            return m as usize;
        }
        m += 1;
    }
}

fn sum_to_degree(a: f64, b: f64, c: f64, d: f64, x: f64, y: f64, max_degree: usize) -> f64 {
    let mut acc = Neumaier::default();
    let mut row_head = 1.0; // t(0, n)
    for n in 0..=max_degree {
        if n > 0 {
            let nf = n as f64;
            row_head *= (a + nf - 1.0) * (b + nf - 1.0) / ((d + nf - 1.0) * nf) * y;
        }
        let mut t = row_head;
        acc.add(t);
        for m in 1..=(max_degree - n) {
            let (mf, nf) = (m as f64, n as f64);
            t *= (a + mf + nf - 1.0) * (b + mf + nf - 1.0) / ((c + mf - 1.0) * mf) * x;
            acc.add(t);
        }
    }
    acc.total()
}

/// Covariance through the `F4` representation:
///
/// * `k * l <= 0`: `a^|k| b^|l| F4(|k|+1, |l|+1, |k|+1, |l|+1; a^2, b^2)`;
/// * `k * l >= 0`: `a^|k| b^|l| C(|k|+|l|, |k|) F4(|k|+|l|+1, 1, |k|+1, |l|+1; a^2, b^2)`.
///
/// `tol` bounds the absolute error of the covariance.
pub fn cov_f4(p: ModelParams, k: i64, l: i64, tol: f64) -> Result<f64> {
    p.check_stationary()?;
    let (ka, la) = (k.unsigned_abs(), l.unsigned_abs());
    let x = p.alpha * p.alpha;
    let y = p.beta * p.beta;
    let mono = p.alpha.powi(ka as i32) * p.beta.powi(la as i32);
    if mono == 0.0 {
        return Ok(0.0);
    }
    let (prefactor, params) = if k.signum() * l.signum() <= 0 {
        (mono, (ka + 1, la + 1, ka + 1, la + 1))
    } else {
        let binom = ln_binomial(ka + la, ka).exp();
        (mono * binom, (ka + la + 1, 1, ka + 1, la + 1))
    };
    let (pa, pb, pc, pd) = params;
    let series = f4_series(
        pa as u32,
        pb as u32,
        pc as u32,
        pd as u32,
        x,
        y,
        tol / prefactor.abs(),
    )?;
    Ok(prefactor * series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::cov_closed;
    use approx::assert_abs_diff_eq;

    #[test]
    fn origin_is_one() {
        assert_eq!(f4_series(1, 1, 1, 1, 0.0, 0.0, 1e-12).unwrap(), 1.0);
        assert_eq!(f4_series(3, 2, 5, 1, 0.0, 0.0, 1e-12).unwrap(), 1.0);
    }

    #[test]
    fn reduction_identity() {
        // F4(a, b, a, b; -x/((1-x)(1-y)), -y/((1-x)(1-y))) = (1-x)^b (1-y)^a / (1 - xy)
        for &(a, b, x, y) in &[(1u32, 1u32, 0.1, 0.1), (2, 3, 0.12, 0.05), (1, 4, 0.02, 0.15)] {
            let den = (1.0 - x) * (1.0 - y);
            let lhs = f4_series(a, b, a, b, -x / den, -y / den, 1e-13).unwrap();
            let rhs = (1.0 - x).powi(b as i32) * (1.0 - y).powi(a as i32) / (1.0 - x * y);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
        let den: f64 = 0.81;
        assert_abs_diff_eq!(
            f4_series(1, 1, 1, 1, -0.1 / den, -0.1 / den, 1e-12).unwrap(),
            0.81 / 0.99,
            epsilon = 1e-12
        );
    }

    #[test]
    fn outside_region_diverges() {
        assert!(matches!(
            f4_series(1, 1, 1, 1, 0.36, 0.16, 1e-10),
            Err(Error::Divergent(_))
        ));
        // x = y = 0.2 in the reduction identity lands outside the region
        assert!(matches!(
            f4_series(1, 1, 1, 1, -0.3125, -0.3125, 1e-10),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn one_variable_reduces_to_binomial_series() {
        // F4(a, b, c, d; x, 0) = 2F1(a, b; c; x); with b = c this is (1 - x)^-a
        let v = f4_series(3, 2, 2, 7, 0.4, 0.0, 1e-14).unwrap();
        assert_abs_diff_eq!(v, 0.6f64.powi(-3), epsilon = 1e-12);
    }

    #[test]
    fn cov_examples() {
        let p = ModelParams::new(0.25, 0.25);
        assert_abs_diff_eq!(cov_f4(p, 0, 0, 1e-12).unwrap(), 1.1547005, epsilon = 1e-7);
        assert_abs_diff_eq!(
            cov_f4(p, 0, 0, 1e-13).unwrap(),
            0.75f64.powf(-0.5),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            cov_f4(p, 1, -1, 1e-13).unwrap(),
            cov_closed(p, 1, -1).unwrap(),
            epsilon = 1e-12
        );
        let p = ModelParams::new(0.3, -0.4);
        assert_abs_diff_eq!(
            cov_f4(p, 2, 0, 1e-12).unwrap(),
            cov_closed(p, 2, 0).unwrap(),
            epsilon = 1e-10
        );
    }
}
