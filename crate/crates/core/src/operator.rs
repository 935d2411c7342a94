use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix2;
use num_complex::Complex64;

/// A 2×2 complex matrix in the charge basis {|0⟩, |1⟩}, or in whatever
/// two-state basis the caller has rotated it into.
#[derive(Clone, Copy, PartialEq)]
pub struct OperatorMatrix(pub Matrix2<Complex64>);

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl OperatorMatrix {
    pub fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Self(Matrix2::new(m00, m01, m10, m11))
    }

    pub fn zeros() -> Self {
        Self(Matrix2::from_element(ZERO))
    }

    pub fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(d0: f64, d1: f64) -> Self {
        Self::new(d0.into(), ZERO, ZERO, d1.into())
    }

    /// Hermitian matrix with real diagonal and upper off-diagonal `off`.
    pub fn hermitian(d0: f64, off: Complex64, d1: f64) -> Self {
        Self::new(d0.into(), off, off.conj(), d1.into())
    }

    /// Columns are the two basis vectors.
    pub fn from_columns(c0: [Complex64; 2], c1: [Complex64; 2]) -> Self {
        Self::new(c0[0], c1[0], c0[1], c1[1])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0[(0, 0)] + self.0[(1, 1)]
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(self.0 * other.0 - other.0 * self.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0 * Complex64::new(s, 0.0))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self(self.0 * s)
    }

    /// `u† · self · u`: matrix elements in the basis given by the columns of `u`.
    pub fn in_basis(&self, u: &Self) -> Self {
        Self(u.0.adjoint() * self.0 * u.0)
    }

    /// `u · self · u†`: inverse of [`in_basis`](Self::in_basis).
    pub fn from_basis(&self, u: &Self) -> Self {
        Self(u.0 * self.0 * u.0.adjoint())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        (*self - self.adjoint()).max_abs() <= tol * scale
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (Self(self.0.adjoint() * self.0) - Self::identity()).max_abs() <= tol
    }
}

impl Default for OperatorMatrix {
    fn default() -> Self {
        Self::zeros()
    }
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{:e}, {:e}], [{:e}, {:e}]]",
            self.get(0, 0),
            self.get(0, 1),
            self.get(1, 0),
            self.get(1, 1)
        )
    }
}

impl Add for OperatorMatrix {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sub for OperatorMatrix {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Neg for OperatorMatrix {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl Mul for OperatorMatrix {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_change_round_trips() {
        let u = OperatorMatrix::from_columns(
            [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
            [Complex64::new(0.8, 0.0), Complex64::new(0.0, -0.6)],
        );
        assert!(u.is_unitary(1e-14));
        let a = OperatorMatrix::hermitian(1.0, Complex64::new(0.3, -0.2), -2.0);
        let back = a.in_basis(&u).from_basis(&u);
        assert!((back - a).max_abs() < 1e-14);
        assert!(a.in_basis(&u).is_hermitian(1e-14));
    }

    #[test]
    fn commutator_of_diagonals_vanishes() {
        let a = OperatorMatrix::diag(1.0, 2.0);
        let b = OperatorMatrix::diag(-3.0, 5.0);
        assert_eq!(a.commutator(&b).max_abs(), 0.0);
    }
}
