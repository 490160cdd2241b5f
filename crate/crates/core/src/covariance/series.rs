use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Upper bound on the variance dropped when the moving-average representation
/// is cut at diagonal depth `margin`: `q^(2(margin+1)) / (1 - q^2)`.
///
/// The depth-`t` weights `C(t, i) a^i b^(t-i)` satisfy
/// `sum_i C(t, i)^2 a^(2i) b^(2(t-i)) <= (|a| + |b|)^(2t)`.
pub fn tail_variance_bound(q: f64, margin: u32) -> f64 {
    q.powi(2 * (margin as i32 + 1)) / (1.0 - q * q)
}

/// Smallest depth whose [`tail_variance_bound`] is at most `tol`.
pub fn margin_for_tolerance(q: f64, tol: f64) -> Result<u32> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::OutOfRange(format!("q = {q} must lie in [0, 1)")));
    }
    if !(tol > 0.0) {
        return Err(Error::OutOfRange(format!("tolerance must be positive, got {tol}")));
    }
    if q == 0.0 {
        return Ok(0);
    }
    // q^(2(M+1)) <= tol (1 - q^2)
    let m = ((tol * (1.0 - q * q)).ln() / (2.0 * q.ln()) - 1.0).ceil().max(0.0);
    let mut m = m as u32;
    while m > 0 && tail_variance_bound(q, m - 1) <= tol {
        m -= 1;
    }
    while tail_variance_bound(q, m) > tol {
        m += 1;
    }
    Ok(m)
}

/// Covariance as the inner product of the moving-average weights of `X(k, l)` and
/// `X(0, 0)` over the innovations they share, keeping shared indices within diagonal
/// depth `margin` of the corner `(min(k,0), min(l,0))`.
///
/// Absolute error is at most [`tail_variance_bound`]`(q, margin)` by Cauchy-Schwarz,
/// since both weight arrays are cut at depth `>= margin + 1`.
pub fn cov_series_oracle(p: ModelParams, k: i64, l: i64, margin: u32) -> Result<f64> {
    p.check_stationary()?;
    let (i0, j0) = (k.min(0), l.min(0));
    let margin = margin as i64;
    // offsets reached by either weight array
    let span = (margin + k.abs() + l.abs()) as usize;
    let weights = WeightTable::new(p, span);
    let mut sum = 0.0;
    for depth in 0..=margin {
        for step_i in 0..=depth {
            let i = i0 - step_i;
            let j = j0 - (depth - step_i);
            sum += weights.get((k - i) as usize, (l - j) as usize)
                * weights.get((-i) as usize, (-j) as usize);
        }
    }
    Ok(sum)
}

/// `C(x + y, x) a^x b^y` for `x + y <= span`, filled by Pascal's rule
/// `w(x, y) = a w(x-1, y) + b w(x, y-1)`.
struct WeightTable {
    side: usize,
    w: Vec<f64>,
}

impl WeightTable {
    fn new(p: ModelParams, span: usize) -> Self {
        let side = span + 1;
        let mut w = vec![0.0; side * side];
        w[0] = 1.0;
        for total in 1..=span {
            for x in 0..=total {
                let y = total - x;
                let mut v = 0.0;
                if x > 0 {
                    v += p.alpha * w[(x - 1) * side + y];
                }
                if y > 0 {
                    v += p.beta * w[x * side + y - 1];
                }
                w[x * side + y] = v;
            }
        }
        Self { side, w }
    }

    fn get(&self, x: usize, y: usize) -> f64 {
        self.w[x * self.side + y]
    }
}
