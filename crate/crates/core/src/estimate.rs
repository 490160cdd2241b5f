//! Least-squares estimation of `(alpha, beta)` over a triangle window.
//!
//! With regressors `x1 = X(i-1, j)`, `x2 = X(i, j-1)` and response `y = X(i, j)`
//! summed over the triangle, `B = sum x x^T`, `C = sum x y` and the estimate is
//! `B^-1 C`, formed as `adj(B) C / det B`. When the field carries its innovations the
//! score `A = sum x e` is reported as well; `theta_hat - theta = adj(B) A / det B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::Matrix2;
use crate::model::{triangle_indices, Field, ModelParams, TriangleWindow};
use crate::sum::Neumaier;

pub use crate::mat2::{adjugate2, det2};

/// Relative threshold on `|det B|` below which the design counts as singular.
pub const SINGULAR_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    #[serde(rename = "B")]
    pub b: Matrix2,
    #[serde(rename = "C")]
    pub c: [f64; 2],
    /// Score vector, present when the field carries innovations.
    #[serde(rename = "A", skip_serializing_if = "Option::is_none", default)]
    pub a: Option<[f64; 2]>,
    #[serde(rename = "detB")]
    pub det_b: f64,
}

impl EstimateResult {
    pub fn theta_hat(&self) -> [f64; 2] {
        [self.alpha_hat, self.beta_hat]
    }

    /// `theta_hat - theta` for the generating parameters.
    pub fn error(&self, p: ModelParams) -> [f64; 2] {
        [self.alpha_hat - p.alpha, self.beta_hat - p.beta]
    }
}

/// Regressor/response triples `(x1, x2, y)` over the triangle, by layer.
fn for_each_triple(f: &Field, w: TriangleWindow, mut visit: impl FnMut(usize, f64, f64, f64)) -> Result<()> {
    if f.window() == w {
        let v = f.values();
        let mut t = 0;
        for d in 1..=w.s().max(0) as usize {
            let prev = w.layer_start(d - 1);
            let cur = w.layer_start(d);
            for o in 0..w.layer_len(d) {
                visit(t, v[prev + o], v[prev + o + 1], v[cur + o]);
                t += 1;
            }
        }
        return Ok(());
    }
    for (t, (i, j)) in triangle_indices(w).into_iter().enumerate() {
        let get = |i, j| f.value(i, j).ok_or(Error::MissingValues(i, j));
        visit(t, get(i - 1, j)?, get(i, j - 1)?, get(i, j)?);
    }
    Ok(())
}

/// `(B, C)` summed over the triangle of `w`, with compensated accumulation.
pub fn normal_equations(f: &Field, w: TriangleWindow) -> Result<(Matrix2, [f64; 2])> {
    let mut acc = [Neumaier::default(); 5];
    for_each_triple(f, w, |_, x1, x2, y| {
        acc[0].add(x1 * x1);
        acc[1].add(x1 * x2);
        acc[2].add(x2 * x2);
        acc[3].add(x1 * y);
        acc[4].add(x2 * y);
    })?;
    let b = Matrix2::symmetric(acc[0].total(), acc[1].total(), acc[2].total());
    Ok((b, [acc[3].total(), acc[4].total()]))
}

/// Score `A = sum (x1 e, x2 e)` over the triangle of the field's own window.
pub fn score_vector(f: &Field, w: TriangleWindow) -> Result<[f64; 2]> {
    let eps = f.innovations().ok_or(Error::MissingInnovations)?;
    if f.window() != w {
        return Err(Error::OutOfRange(format!(
            "innovations are stored for window ({}, {}), not ({}, {})",
            f.window().k,
            f.window().l,
            w.k,
            w.l
        )));
    }
    let mut acc = [Neumaier::default(); 2];
    for_each_triple(f, w, |t, x1, x2, _| {
        acc[0].add(x1 * eps[t]);
        acc[1].add(x2 * eps[t]);
    })?;
    Ok([acc[0].total(), acc[1].total()])
}

/// Solves `B theta = C` by the adjugate.
pub fn solve_normal(b: Matrix2, c: [f64; 2]) -> Result<([f64; 2], f64)> {
    let det = b.det();
    let scale = b.a11 * b.a22 + b.a12 * b.a12;
    if !(det.abs() > SINGULAR_REL_TOL * scale) {
        return Err(Error::SingularDesign { det, scale });
    }
    let num = b.adjugate().mul_vec(c);
    Ok(([num[0] / det, num[1] / det], det))
}

pub fn lse(f: &Field, w: TriangleWindow) -> Result<EstimateResult> {
    let (b, c) = normal_equations(f, w)?;
    let (theta, det_b) = solve_normal(b, c)?;
    let a = match f.innovations() {
        Some(_) if f.window() == w => Some(score_vector(f, w)?),
        _ => None,
    };
    Ok(EstimateResult {
        alpha_hat: theta[0],
        beta_hat: theta[1],
        b,
        c,
        a,
        det_b,
    })
}
