//! Fixed-size 2x2 matrices: determinant, adjugate, SPD inverse and square root.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major 2x2 matrix. Serializes as `[[a11, a12], [a21, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct Matrix2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Matrix2 {
    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub const fn symmetric(diag1: f64, off: f64, diag2: f64) -> Self {
        Self::new(diag1, off, off, diag2)
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    /// `adj([[a, b], [c, d]]) = [[d, -b], [-c, a]]`.
    pub fn adjugate(&self) -> Self {
        Self::new(self.a22, -self.a12, -self.a21, self.a11)
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(c * self.a11, c * self.a12, c * self.a21, c * self.a22)
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    /// Quadratic form `u' M v`.
    pub fn bilinear(&self, u: [f64; 2], v: [f64; 2]) -> f64 {
        let mv = self.mul_vec(v);
        u[0] * mv[0] + u[1] * mv[1]
    }

    pub fn frobenius(&self) -> f64 {
        self.entries().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    pub fn is_symmetric(&self) -> bool {
        self.a12 == self.a21
    }

    /// Eigenvalues of a symmetric matrix, ascending.
    pub fn sym_eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * self.trace();
        let half_diff = 0.5 * (self.a11 - self.a22);
        let off = 0.5 * (self.a12 + self.a21);
        let r = half_diff.hypot(off);
        [mean - r, mean + r]
    }
}

impl From<[[f64; 2]; 2]> for Matrix2 {
    fn from(m: [[f64; 2]; 2]) -> Self {
        Self::new(m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl From<Matrix2> for [[f64; 2]; 2] {
    fn from(m: Matrix2) -> Self {
        [[m.a11, m.a12], [m.a21, m.a22]]
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a11 + o.a11,
            self.a12 + o.a12,
            self.a21 + o.a21,
            self.a22 + o.a22,
        )
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a11 - o.a11,
            self.a12 - o.a12,
            self.a21 - o.a21,
            self.a22 - o.a22,
        )
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

pub fn det2(m: &Matrix2) -> f64 {
    m.det()
}

pub fn adjugate2(m: &Matrix2) -> Matrix2 {
    m.adjugate()
}

/// Inverse of a symmetric positive definite 2x2 matrix via its adjugate.
pub fn invert_spd2(m: &Matrix2) -> Result<Matrix2> {
    let det = m.det();
    if !(det > 0.0) || !(m.a11 > 0.0) {
        return Err(Error::Singular);
    }
    Ok(m.adjugate().scale(1.0 / det))
}

/// Symmetric positive semidefinite square root.
///
/// For a 2x2 PSD matrix `S = (M + sqrt(det M) I) / sqrt(tr M + 2 sqrt(det M))`.
pub fn sqrt_spd2(m: &Matrix2) -> Result<Matrix2> {
    let det = m.det();
    let eig = m.sym_eigenvalues();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    if !m.is_symmetric() || eig[0] < -1e-14 * scale {
        return Err(Error::OutOfRange(format!(
            "square root needs a symmetric PSD matrix, eigenvalues {eig:?}"
        )));
    }
    let root_det = det.max(0.0).sqrt();
    let t = m.trace() + 2.0 * root_det;
    if t <= 0.0 {
        return Ok(Matrix2::zero());
    }
    Ok((*m + Matrix2::identity().scale(root_det)).scale(1.0 / t.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn adjugate_examples() {
        let b = Matrix2::symmetric(6.0, 3.0, 6.0);
        assert_eq!(b.adjugate(), Matrix2::new(6.0, -3.0, -3.0, 6.0));
        assert_eq!(b.det(), 27.0);
        assert_eq!(Matrix2::identity().adjugate(), Matrix2::identity());
        assert_eq!(Matrix2::identity().det(), 1.0);
        let m = Matrix2::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(m.adjugate(), Matrix2::new(4.0, -2.0, -3.0, 1.0));
        assert_eq!(m.det(), -2.0);
    }

    #[test]
    fn spd_helpers() {
        let m = Matrix2::identity().scale(0.25);
        assert_eq!(invert_spd2(&m).unwrap(), Matrix2::identity().scale(4.0));
        assert_eq!(sqrt_spd2(&m).unwrap(), Matrix2::identity().scale(0.5));
        assert!(invert_spd2(&Matrix2::symmetric(1.0, 1.0, 1.0)).is_err());
        // rank-one PSD still has a root
        let r = sqrt_spd2(&Matrix2::symmetric(1.0, 1.0, 1.0)).unwrap();
        assert!(((r * r) - Matrix2::symmetric(1.0, 1.0, 1.0)).max_abs() < 1e-15);
        assert!(sqrt_spd2(&Matrix2::symmetric(1.0, 2.0, 1.0)).is_err());
    }

    #[test]
    fn serde_as_nested_rows() {
        let m = Matrix2::new(1.0, 2.0, 3.0, 4.0);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[1.0,2.0],[3.0,4.0]]");
        assert_eq!(serde_json::from_str::<Matrix2>(&s).unwrap(), m);
    }

    proptest! {
        #[test]
        fn adjugate_identity(a in -1e3f64..1e3, b in -1e3f64..1e3, c in -1e3f64..1e3, d in -1e3f64..1e3) {
            let m = Matrix2::new(a, b, c, d);
            let lhs = m * m.adjugate();
            let rhs = Matrix2::identity().scale(m.det());
            let scale = (a.abs() * d.abs() + b.abs() * c.abs()).max(1.0);
            prop_assert!((lhs - rhs).max_abs() <= 4.0 * f64::EPSILON * scale);
        }

        #[test]
        fn sqrt_squares_back(l1 in 0.0f64..10.0, l2 in 0.0f64..10.0, phi in 0.0f64..3.2) {
            let (c, s) = (phi.cos(), phi.sin());
            let m = Matrix2::symmetric(
                l1 * c * c + l2 * s * s,
                (l1 - l2) * c * s,
                l1 * s * s + l2 * c * c,
            );
            let r = sqrt_spd2(&m).unwrap();
            prop_assert!(r.is_symmetric());
            prop_assert!(r.sym_eigenvalues()[0] >= -1e-12);
            prop_assert!(((r * r) - m).max_abs() <= 1e-12 * (1.0 + m.max_abs()));
        }
    }
}
