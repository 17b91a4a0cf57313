//! Floating-point scalar abstraction shared by the geometry, measurement and
//! estimation code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar usable throughout the crate: `f32` or `f64`.
///
/// Besides the arithmetic supplied by `num-traits`, each scalar carries the
/// tolerances used to accept unit vectors and to compare 2×2 operators. The
/// `f64` values are the contractual ones; `f32` gets tolerances scaled to its
/// precision.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Accepted deviation of a direction or pure-state norm from 1.
    const UNIT_TOL: f64;
    /// Accepted entrywise error on operator identities (completeness,
    /// hermiticity, trace, eigenvalue positivity).
    const MATRIX_TOL: f64;

    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn unit_tol() -> Self {
        Self::lit(Self::UNIT_TOL)
    }

    #[inline]
    fn matrix_tol() -> Self {
        Self::lit(Self::MATRIX_TOL)
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }

    /// Lossy conversion used for diagnostics and for the sampling layer.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const UNIT_TOL: f64 = 1e-9;
    const MATRIX_TOL: f64 = 1e-12;
}

impl Scalar for f32 {
    const UNIT_TOL: f64 = 1e-5;
    const MATRIX_TOL: f64 = 1e-5;
}

/// Degrees to radians.
#[inline]
pub fn deg<T: Scalar>(degrees: T) -> T {
    degrees.to_radians()
}
