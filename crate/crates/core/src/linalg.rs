//! Cholesky factorization with a bounded jitter escalation.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};

/// Diagonal jitter multipliers tried, relative to the largest diagonal entry,
/// after the plain factorization fails.
pub const JITTER_STEPS: [f64; 3] = [1e-12, 1e-10, 1e-8];

/// Lower-triangular factor `L` with `L L^T = M + jitter I`.
#[derive(Debug, Clone)]
pub struct CholFactor {
    pub lower: DMatrix<f64>,
    /// Absolute jitter added to the diagonal; zero when none was needed.
    pub jitter: f64,
}

/// Factors a symmetric matrix, escalating diagonal jitter through
/// [`JITTER_STEPS`] before giving up with `NotSpd`.
pub fn chol_spd(m: &DMatrix<f64>) -> Result<CholFactor> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::OutOfRange(format!(
            "Cholesky needs a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.diagonal().amax();
    for i in 0..n {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::OutOfRange(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    if let Some(c) = Cholesky::new(m.clone()) {
        return Ok(CholFactor {
            lower: c.unpack(),
            jitter: 0.0,
        });
    }
    let mut jitter = 0.0;
    for step in JITTER_STEPS {
        jitter = step * scale;
        let mut shifted = m.clone();
        for i in 0..n {
            shifted[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(shifted) {
            return Ok(CholFactor {
                lower: c.unpack(),
                jitter,
            });
        }
    }
    Err(Error::NotSpd { jitter })
}
