//! Optimal joint measurements of two incompatible qubit observables.
//!
//! * [`bloch`] and [`matrix`]: Bloch-vector algebra and the explicit 2×2
//!   operator picture used to cross-check it.
//! * [`povm`]: effects, the sharpness tradeoff relation and synthesis of the
//!   optimal two-branch joint measurement.
//! * [`montecarlo`]: seeded simulation of heralded single-photon counting.
//! * [`estimator`]: expectations, sharpnesses, variances and their errors.
//! * [`experiment`]: configs, θ sweeps and CSV/JSON results.
//!
//! The geometry, measurement and estimation code is generic over
//! [`Scalar`] (`f32` or `f64`); the aliases below fix the common `f64` case.

pub mod bloch;
pub mod checks;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod matrix;
pub mod montecarlo;
pub mod povm;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type BlochVector = bloch::BlochVector<f64>;
pub type BlochVectorF32 = bloch::BlochVector<f32>;
pub type DensityMatrix = bloch::DensityMatrix<f64>;
pub type Matrix2 = matrix::Matrix2<f64>;
pub type DichotomicEffectPair = povm::DichotomicEffectPair<f64>;
pub type MarginalPair = povm::MarginalPair<f64>;
pub type JointDesign = povm::JointDesign<f64>;
pub type JointDesignF32 = povm::JointDesign<f32>;
pub type FourOutcomeJointPovm = povm::FourOutcomeJointPovm<f64>;
pub type OptimalSharpness = povm::OptimalSharpness<f64>;
pub type EstimateResult = estimator::EstimateResult<f64>;
pub type JointEstimate = estimator::JointEstimate<f64>;

pub use experiment::{ExperimentConfig, ResultRow};
pub use montecarlo::{CountRecord, RngSeed, SharpCountRecord};
