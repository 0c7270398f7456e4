//! Complex 2x2 matrices, the residue algebra every other module works in.

use num_complex::Complex64;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A 2x2 complex matrix in row-major layout:
/// `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Mat2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(x: Complex64, y: Complex64) -> Self {
        Mat2::new(x, ZERO, ZERO, y)
    }

    pub fn from_rows(rows: [[Complex64; 2]; 2]) -> Self {
        Mat2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        match (row, col) {
            (0, 0) => self.a,
            (0, 1) => self.b,
            (1, 0) => self.c,
            (1, 1) => self.d,
            _ => panic!("Mat2 index out of range: ({row}, {col})"),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == 0.0 {
            return None;
        }
        let inv = ONE / det;
        Some(Mat2::new(self.d * inv, -self.b * inv, -self.c * inv, self.a * inv))
    }

    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }

    /// Max-norm over entries.
    pub fn norm_max(&self) -> f64 {
        self.a
            .norm()
            .max(self.b.norm())
            .max(self.c.norm())
            .max(self.d.norm())
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()).sqrt()
    }

    pub fn mul_vec(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// Eigenvalues by the quadratic formula on the characteristic polynomial.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let half_tr = self.trace() * 0.5;
        let disc = (half_tr * half_tr - self.det()).sqrt();
        (half_tr + disc, half_tr - disc)
    }

    /// An eigenvector (unit norm) for the given eigenvalue, chosen from the
    /// larger of the two candidate rows of `A - lambda I` for stability.
    pub fn eigenvector(&self, lambda: Complex64) -> [Complex64; 2] {
        // Rows of A - lambda I are (a-l, b) and (c, d-l); an eigenvector is
        // orthogonal (complex-bilinearly) to either nonzero row.
        let r1 = (self.a - lambda, self.b);
        let r2 = (self.c, self.d - lambda);
        let n1 = r1.0.norm().hypot(r1.1.norm());
        let n2 = r2.0.norm().hypot(r2.1.norm());
        let v = if n1 >= n2 { [-r1.1, r1.0] } else { [-r2.1, r2.0] };
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if n == 0.0 {
            // Scalar matrix: any direction works.
            [ONE, ZERO]
        } else {
            [v[0] / n, v[1] / n]
        }
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::new(self.a + rhs.a, self.b + rhs.b, self.c + rhs.c, self.d + rhs.d)
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, rhs: Mat2) {
        *self = *self + rhs;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2::new(self.a - rhs.a, self.b - rhs.b, self.c - rhs.c, self.d - rhs.d)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn det_trace_inverse() {
        let m = Mat2::new(c(1.0, 1.0), c(2.0, 0.0), c(0.0, -1.0), c(3.0, 0.5));
        let inv = m.inverse().unwrap();
        let p = m * inv;
        assert!((p - Mat2::identity()).norm_max() < 1e-14);
        assert!((m.trace() - (m.a + m.d)).norm() < 1e-15);
    }

    #[test]
    fn eigen_pair_reconstructs() {
        let m = Mat2::new(c(0.3, 0.7), c(-1.2, 0.4), c(0.9, -0.2), c(-0.3, -0.7));
        let (l1, l2) = m.eigenvalues();
        assert!((l1 + l2 - m.trace()).norm() < 1e-12);
        assert!((l1 * l2 - m.det()).norm() < 1e-12);
        for l in [l1, l2] {
            let v = m.eigenvector(l);
            let mv = m.mul_vec(v);
            let r = [(mv[0] - l * v[0]).norm(), (mv[1] - l * v[1]).norm()];
            assert!(r[0].max(r[1]) < 1e-12);
        }
    }

    #[test]
    fn commutator_of_commuting_is_zero() {
        let m = Mat2::diag(c(1.0, 2.0), c(-0.5, 0.0));
        let n = Mat2::diag(c(0.2, -0.1), c(3.0, 1.0));
        assert_eq!(m.commutator(&n), Mat2::zero());
    }
}
