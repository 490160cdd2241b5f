//! Sample moments of bivariate draws and a one-dimensional normality diagnostic.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::mat2::Matrix2;
use crate::sum::{sum, Neumaier};

/// Kolmogorov-Smirnov critical constant at roughly the 1% level.
pub const KS_CRITICAL: f64 = 1.63;

/// Mean and unbiased covariance, accumulated in input order.
pub fn summarize(xs: &[[f64; 2]]) -> ([f64; 2], Matrix2) {
    let n = xs.len();
    if n == 0 {
        return ([f64::NAN; 2], Matrix2::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN));
    }
    let mean = [
        sum(xs.iter().map(|x| x[0])) / n as f64,
        sum(xs.iter().map(|x| x[1])) / n as f64,
    ];
    if n == 1 {
        return (mean, Matrix2::zero());
    }
    let mut acc = [Neumaier::default(); 3];
    for x in xs {
        let (d0, d1) = (x[0] - mean[0], x[1] - mean[1]);
        acc[0].add(d0 * d0);
        acc[1].add(d0 * d1);
        acc[2].add(d1 * d1);
    }
    let den = (n - 1) as f64;
    (
        mean,
        Matrix2::symmetric(acc[0].total() / den, acc[1].total() / den, acc[2].total() / den),
    )
}

/// Mean and unbiased variance of a scalar sample.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = sum(xs.iter().copied()) / n;
    let var = sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
    (mean, var)
}

/// Unit eigenvectors of a symmetric 2x2 matrix, largest eigenvalue first.
pub fn principal_axes(m: &Matrix2) -> [[f64; 2]; 2] {
    let phi = 0.5 * (2.0 * m.a12).atan2(m.a11 - m.a22);
    let (s, c) = phi.sin_cos();
    [[c, s], [-s, c]]
}

/// Largest distance between the empirical CDF of the standardized sample and the
/// standard normal CDF.
pub fn ks_normal_d(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let (mean, var) = mean_var(xs);
    let sd = var.sqrt();
    if !(sd > 0.0) {
        return 1.0;
    }
    let phi = Normal::standard();
    let mut z: Vec<f64> = xs.iter().map(|x| (x - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let nf = n as f64;
    z.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = phi.cdf(v);
            (f - i as f64 / nf).max((i + 1) as f64 / nf - f)
        })
        .fold(0.0, f64::max)
}

/// Variance and normality diagnostic of the sample projected on one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub name: String,
    pub direction: [f64; 2],
    pub variance: f64,
    pub target_variance: f64,
    pub ks_d: f64,
    pub ks_threshold: f64,
    pub ks_ok: bool,
}

impl Projection {
    pub fn new(name: &str, direction: [f64; 2], xs: &[[f64; 2]], target: &Matrix2) -> Self {
        let proj: Vec<f64> = xs.iter().map(|x| direction[0] * x[0] + direction[1] * x[1]).collect();
        let (_, variance) = mean_var(&proj);
        let ks_d = ks_normal_d(&proj);
        let ks_threshold = KS_CRITICAL / (xs.len() as f64).sqrt();
        Self {
            name: name.to_string(),
            direction,
            variance,
            target_variance: target.bilinear(direction, direction),
            ks_d,
            ks_threshold,
            ks_ok: ks_d <= ks_threshold,
        }
    }
}
