use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// `P(Bin(n, nu) = x)` evaluated in log space.
pub fn binom_pmf(n: u64, nu: f64, x: u64) -> f64 {
    if x > n {
        return 0.0;
    }
    // degenerate laws put all mass on one point
    if nu <= 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    if nu >= 1.0 {
        return if x == n { 1.0 } else { 0.0 };
    }
    let ln = ln_binomial(n, x) + x as f64 * nu.ln() + (n - x) as f64 * (-nu).ln_1p();
    ln.exp()
}

/// `P(S = j)` for `S = Bin(n, nu) + Bin(m, 1 - nu)` with independent summands.
pub fn pmf_s(n: u64, m: u64, nu: f64, j: i64) -> f64 {
    if j < 0 || j as u64 > n + m {
        return 0.0;
    }
    let j = j as u64;
    let lo = j.saturating_sub(m);
    let hi = n.min(j);
    let p: f64 = (lo..=hi)
        .map(|x| binom_pmf(n, nu, x) * binom_pmf(m, 1.0 - nu, j - x))
        .sum();
    p.clamp(0.0, 1.0)
}

/// Covariance through the binomial mixture, valid for `k * l >= 0`:
///
/// `R(k, l) = sign(a)^|k| sign(b)^|l| sum_i q^(|k|+|l|+2i) P(S(i, |k|+|l|+i) = |l| + i)`
///
/// with `q = |a| + |b|` and `nu = |a| / q`. Since every probability is at most one,
/// the tail after term `i` is below `q^(|k|+|l|+2(i+1)) / (1 - q^2)`; summation stops
/// once that falls under `tol`.
pub fn cov_binrep(p: ModelParams, k: i64, l: i64, tol: f64) -> Result<f64> {
    p.check_stationary()?;
    if k.signum() * l.signum() < 0 {
        return Err(Error::WrongQuadrant { k, l });
    }
    if !(tol > 0.0) {
        return Err(Error::OutOfRange(format!("tolerance must be positive, got {tol}")));
    }
    let (ka, la) = (k.unsigned_abs(), l.unsigned_abs());
    let q = p.q();
    if q == 0.0 {
        return Ok(if ka + la == 0 { 1.0 } else { 0.0 });
    }
    let nu = p.alpha.abs() / q;
    let q2 = q * q;
    let mut weight = q.powi((ka + la) as i32);
    let mut sum = 0.0;
    let mut i: u64 = 0;
    loop {
        sum += weight * pmf_s(i, ka + la + i, nu, (la + i) as i64);
        weight *= q2;
        if weight / (1.0 - q2) < tol {
            break;
        }
        i += 1;
    }
    let sign = |x: f64, n: u64| if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    Ok(sign(p.alpha, ka) * sign(p.beta, la) * sum)
}
