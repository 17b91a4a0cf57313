//! Dense 2×2 complex matrices.
//!
//! This is the operator-level picture of a qubit. Everything the rest of the
//! crate computes in Bloch-vector form (Born probabilities, effects, marginals,
//! fidelities) can be recomputed here from explicit Pauli matrices, which is
//! how the vector-form code is cross-checked.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::bloch::BlochVector;
use crate::scalar::Scalar;

/// Row-major 2×2 complex matrix `[[m00, m01], [m10, m11]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix2<T> {
    pub m: [[Complex<T>; 2]; 2],
}

fn re<T: Scalar>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

impl<T: Scalar> Matrix2<T> {
    pub fn new(m00: Complex<T>, m01: Complex<T>, m10: Complex<T>, m11: Complex<T>) -> Self {
        Self {
            m: [[m00, m01], [m10, m11]],
        }
    }

    pub fn zero() -> Self {
        let z = re(T::zero());
        Self::new(z, z, z, z)
    }

    pub fn identity() -> Self {
        let z = re(T::zero());
        let o = re(T::one());
        Self::new(o, z, z, o)
    }

    pub fn pauli_x() -> Self {
        let z = re(T::zero());
        let o = re(T::one());
        Self::new(z, o, o, z)
    }

    pub fn pauli_y() -> Self {
        let z = re(T::zero());
        let i = Complex::new(T::zero(), T::one());
        Self::new(z, -i, i, z)
    }

    pub fn pauli_z() -> Self {
        let z = re(T::zero());
        let o = re(T::one());
        Self::new(o, z, z, -o)
    }

    /// `scalar·1 + v·σ`, assembled from the three Pauli matrices.
    pub fn from_pauli(scalar: T, v: &BlochVector<T>) -> Self {
        Self::identity().scale(scalar)
            + Self::pauli_x().scale(v.x)
            + Self::pauli_y().scale(v.y)
            + Self::pauli_z().scale(v.z)
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = *self;
        for row in out.m.iter_mut() {
            for e in row.iter_mut() {
                *e = *e * s;
            }
        }
        out
    }

    pub fn trace(&self) -> Complex<T> {
        self.m[0][0] + self.m[1][1]
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let d = *self - *other;
        d.m.iter()
            .flat_map(|row| row.iter())
            .map(|e| e.norm())
            .fold(T::zero(), T::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.approx_eq(&self.adjoint(), tol)
    }

    /// Real part of `Tr[self · other]`.
    pub fn trace_product(&self, other: &Self) -> T {
        (*self * *other).trace().re
    }

    /// Eigenvalues `(low, high)` of the Hermitian part of the matrix.
    pub fn hermitian_eigenvalues(&self) -> (T, T) {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let b = (self.m[0][1] + self.m[1][0].conj()).scale(T::half());
        let mean = (a + d) * T::half();
        let half_gap = ((a - d) * T::half()).hypot(b.norm());
        (mean - half_gap, mean + half_gap)
    }

    /// Normalized eigenvector of a Hermitian matrix for eigenvalue `lambda`.
    pub fn hermitian_eigenvector(&self, lambda: T) -> [Complex<T>; 2] {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let b = self.m[0][1];
        let v = if b.norm() > T::epsilon() {
            [b, re(lambda - a)]
        } else if (lambda - a).abs() <= (lambda - d).abs() {
            [re(T::one()), re(T::zero())]
        } else {
            [re(T::zero()), re(T::one())]
        };
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        [v[0].unscale(n), v[1].unscale(n)]
    }

    /// Positive semidefinite within `tol` (Hermitian and smallest eigenvalue ≥ −tol).
    pub fn is_psd(&self, tol: T) -> bool {
        self.is_hermitian(tol) && self.hermitian_eigenvalues().0 >= -tol
    }

    /// Recovers `(scalar, v)` such that `self = scalar·1 + v·σ` (Hermitian input).
    pub fn pauli_components(&self) -> (T, BlochVector<T>) {
        let h = T::half();
        let scalar = self.trace().re * h;
        let x = self.trace_product(&Self::pauli_x()) * h;
        let y = self.trace_product(&Self::pauli_y()) * h;
        let z = self.trace_product(&Self::pauli_z()) * h;
        (scalar, BlochVector::new(x, y, z))
    }
}

impl<T: Scalar> Add for Matrix2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] = self.m[i][j] + rhs.m[i][j];
            }
        }
        out
    }
}

impl<T: Scalar> Sub for Matrix2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Scalar> Neg for Matrix2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Scalar> Mul for Matrix2<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] = self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j];
            }
        }
        out
    }
}

/// `|⟨u|v⟩|²` for two normalized kets.
pub fn overlap_sq<T: Scalar>(u: &[Complex<T>; 2], v: &[Complex<T>; 2]) -> T {
    (u[0].conj() * v[0] + u[1].conj() * v[1]).norm_sqr()
}
