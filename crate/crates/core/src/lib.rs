//! Fractional-order stochastic gradient descent with Two-Scale Effective
//! Dimension (2SED) adaptation of the fractional exponent, plus the
//! numerics, problems and runtime bound checks that support it.
//!
//! The crate is generic over the scalar type via [`scalar::Scalar`]
//! (`f32` or `f64`); the `*64` aliases below pin the precision the test
//! suite and the CLI harness run at.

pub mod bounds;
pub mod error;
pub mod fisher;
pub mod linalg;
pub mod noise;
pub mod optim;
pub mod problems;
pub mod rng;
pub mod scalar;
pub mod special;

pub use error::{CoreError, Result};
pub use scalar::Scalar;

pub type SymMatrix64 = linalg::SymMatrix<f64>;
pub type Spectrum64 = linalg::Spectrum<f64>;
pub type FisherState64 = fisher::FisherState<f64>;
pub type SedConfig64 = fisher::SedConfig<f64>;
pub type SedValue64 = fisher::SedValue<f64>;
pub type OptimizerConfig64 = optim::OptimizerConfig<f64>;
pub type LayeredParams64 = optim::LayeredParams<f64>;
pub type StepRecord64 = optim::StepRecord<f64>;
pub type RunTrace64 = optim::RunTrace<f64>;
pub type NoiseModel64 = problems::NoiseModel<f64>;
pub type ArModel64 = problems::ArModel<f64>;
pub type ProblemHandle64 = problems::ProblemHandle<f64>;
pub type BoundContext64 = bounds::BoundContext<f64>;

pub type SymMatrix32 = linalg::SymMatrix<f32>;
pub type Spectrum32 = linalg::Spectrum<f32>;
pub type FisherState32 = fisher::FisherState<f32>;
pub type SedConfig32 = fisher::SedConfig<f32>;
pub type OptimizerConfig32 = optim::OptimizerConfig<f32>;
pub type RunTrace32 = optim::RunTrace<f32>;
