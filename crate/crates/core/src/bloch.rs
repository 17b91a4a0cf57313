//! Bloch-vector algebra for a single qubit.
//!
//! A [`BlochVector`] is either a measurement direction (unit norm) or a state
//! (norm ≤ 1, pure states on the sphere). Inputs outside tolerance are
//! rejected, never renormalized.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{overlap_sq, Matrix2};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlochVector<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> BlochVector<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn unit_x() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    pub fn unit_y() -> Self {
        Self::new(T::zero(), T::one(), T::zero())
    }

    pub fn unit_z() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    /// Unit vector at polar angle `polar` from ẑ and azimuth `azimuth` from x̂.
    pub fn from_spherical(polar: T, azimuth: T) -> Self {
        let (sp, cp) = polar.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Self::new(sp * ca, sp * sa, cp)
    }

    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    /// Explicit normalization. Returns `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > T::zero()).then(|| self.scale(n.recip()))
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - T::one()).abs() <= T::unit_tol()
    }

    /// Checks unit norm, returning the vector back for chaining.
    pub fn require_unit(self) -> Result<Self> {
        if self.is_unit() {
            Ok(self)
        } else {
            Err(Error::InvalidDirection {
                norm: self.norm().as_f64(),
            })
        }
    }

    /// Checks `norm ≤ 1` (within tolerance).
    pub fn require_state(self) -> Result<Self> {
        let n = self.norm();
        if n <= T::one() + T::unit_tol() {
            Ok(self)
        } else {
            Err(Error::InvalidState {
                norm: n.as_f64(),
                reason: "Bloch vector lies outside the unit ball",
            })
        }
    }

    pub fn require_pure(self) -> Result<Self> {
        if self.is_unit() {
            Ok(self)
        } else {
            Err(Error::InvalidState {
                norm: self.norm().as_f64(),
                reason: "pure state required",
            })
        }
    }

    /// `self·σ` as an explicit matrix.
    pub fn sigma(&self) -> Matrix2<T> {
        Matrix2::from_pauli(T::zero(), self)
    }

    pub fn map<U>(self, f: impl Fn(T) -> U) -> BlochVector<U> {
        BlochVector {
            x: f(self.x),
            y: f(self.y),
            z: f(self.z),
        }
    }
}

impl<T: Scalar> Add for BlochVector<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> Sub for BlochVector<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Neg for BlochVector<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Scalar> Mul<T> for BlochVector<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// A qubit density matrix `½(1 + r·σ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    matrix: Matrix2<T>,
}

impl<T: Scalar> DensityMatrix<T> {
    /// Wraps a matrix after checking hermiticity, unit trace and positivity.
    pub fn try_from_matrix(matrix: Matrix2<T>) -> Result<Self> {
        let tol = T::matrix_tol();
        if !matrix.is_hermitian(tol) {
            return Err(Error::InvalidState {
                norm: f64::NAN,
                reason: "density matrix is not Hermitian",
            });
        }
        let tr = matrix.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState {
                norm: f64::NAN,
                reason: "density matrix trace is not 1",
            });
        }
        if matrix.hermitian_eigenvalues().0 < -tol {
            return Err(Error::InvalidState {
                norm: f64::NAN,
                reason: "density matrix has a negative eigenvalue",
            });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix2<T> {
        &self.matrix
    }

    /// Born probability `Tr[ρ E]` for an effect `E`.
    pub fn probability(&self, effect: &Matrix2<T>) -> T {
        self.matrix.trace_product(effect)
    }

    pub fn bloch_vector(&self) -> BlochVector<T> {
        let (_, v) = self.matrix.pauli_components();
        v.scale(T::two())
    }
}

/// Angle between two directions, in radians, in `[0, π]`.
///
/// For measurement axes `a`, `b` this is `2θ`; the corresponding state-space
/// angle θ is half of it.
pub fn angle_between<T: Scalar>(a: &BlochVector<T>, b: &BlochVector<T>) -> Result<T> {
    a.require_unit()?;
    b.require_unit()?;
    // atan2 keeps precision near 0 and π where acos is ill-conditioned.
    Ok(a.cross(b).norm().atan2(a.dot(b)))
}

/// Born-rule probabilities `(p₊, p₋)` for measuring `axis·σ` on `state`.
pub fn born_probabilities<T: Scalar>(state: &BlochVector<T>, axis: &BlochVector<T>) -> Result<(T, T)> {
    axis.require_unit()?;
    state.require_state()?;
    let p_plus = (T::one() + axis.dot(state)) * T::half();
    Ok((p_plus, T::one() - p_plus))
}

pub fn to_density_matrix<T: Scalar>(r: &BlochVector<T>) -> Result<DensityMatrix<T>> {
    r.require_state()?;
    let m = Matrix2::from_pauli(T::half(), &r.scale(T::half()));
    DensityMatrix::try_from_matrix(m)
}

/// Fidelity `(1 + r₁·r₂)/2` between two pure states.
pub fn fidelity<T: Scalar>(r1: &BlochVector<T>, r2: &BlochVector<T>) -> Result<T> {
    r1.require_pure()?;
    r2.require_pure()?;
    let f = (T::one() + r1.dot(r2)) * T::half();
    Ok(f.max(T::zero()).min(T::one()))
}

/// Fidelity recomputed as `|⟨ψ₁|ψ₂⟩|²` from density-matrix eigenvectors.
pub fn fidelity_from_kets<T: Scalar>(r1: &BlochVector<T>, r2: &BlochVector<T>) -> Result<T> {
    let ket = |r: &BlochVector<T>| -> Result<_> {
        let rho = to_density_matrix(&r.require_pure()?)?;
        let (_, top) = rho.matrix().hermitian_eigenvalues();
        Ok(rho.matrix().hermitian_eigenvector(top))
    };
    Ok(overlap_sq(&ket(r1)?, &ket(r2)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    type V = BlochVector<f64>;

    #[test]
    fn angle_examples() {
        let z = V::unit_z();
        assert_eq!(angle_between(&z, &z).unwrap(), 0.0);
        assert!((angle_between(&z, &V::unit_x()).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let b = V::from_spherical(50f64.to_radians(), 0.0);
        assert!((angle_between(&z, &b).unwrap() - 50f64.to_radians()).abs() < 1e-14);
        assert!((angle_between(&z, &-z).unwrap() - PI).abs() < 1e-15);
    }

    #[test]
    fn angle_rejects_non_unit() {
        let err = angle_between(&V::new(0.0, 0.0, 1.1), &V::unit_z()).unwrap_err();
        assert!(matches!(err, Error::InvalidDirection { .. }));
    }

    #[test]
    fn born_examples() {
        let z = V::unit_z();
        assert_eq!(born_probabilities(&z, &z).unwrap(), (1.0, 0.0));
        assert_eq!(born_probabilities(&z, &V::unit_x()).unwrap(), (0.5, 0.5));
        let n = V::from_spherical(60f64.to_radians(), 0.3);
        let (pp, pm) = born_probabilities(&z, &n).unwrap();
        assert!((pp - 0.75).abs() < 1e-15 && (pm - 0.25).abs() < 1e-15);
        assert_eq!(pp + pm, 1.0);
        assert!(born_probabilities(&z, &V::new(0.0, 0.0, 0.5)).is_err());
    }

    #[test]
    fn density_matrix_examples() {
        let rho = to_density_matrix(&V::unit_z()).unwrap();
        assert!(rho.matrix().approx_eq(
            &Matrix2::pauli_z().scale(0.5).add(Matrix2::identity().scale(0.5)),
            1e-15
        ));
        assert_eq!(rho.matrix().m[1][1].re, 0.0);
        let mixed = to_density_matrix(&V::zero()).unwrap();
        assert!(mixed.matrix().approx_eq(&Matrix2::identity().scale(0.5), 1e-15));
        let plus = to_density_matrix(&V::unit_x()).unwrap();
        for row in plus.matrix().m {
            for e in row {
                assert!((e.re - 0.5).abs() < 1e-15 && e.im == 0.0);
            }
        }
        assert!(matches!(
            to_density_matrix(&V::new(0.0, 0.8, 0.8)),
            Err(Error::InvalidState { .. })
        ));
        assert!((plus.bloch_vector() - V::unit_x()).norm() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let z = V::unit_z();
        assert_eq!(fidelity(&z, &z).unwrap(), 1.0);
        assert_eq!(fidelity(&z, &-z).unwrap(), 0.0);
        assert_eq!(fidelity(&z, &V::unit_x()).unwrap(), 0.5);
        assert!(fidelity(&z, &V::new(0.0, 0.0, 0.5)).is_err());
    }

    #[test]
    fn single_precision_instantiation() {
        let z = BlochVector::<f32>::unit_z();
        let (pp, _) = born_probabilities(&z, &BlochVector::<f32>::unit_x()).unwrap();
        assert!((pp - 0.5).abs() < 1e-6);
        let rho = to_density_matrix(&BlochVector::<f32>::unit_y()).unwrap();
        assert!(rho.matrix().is_hermitian(1e-6));
    }
}
