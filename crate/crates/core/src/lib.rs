//! Adaptive LASSO for cointegrating regressions.
//!
//! Data-generating processes, OLS and adaptive LASSO estimators, samplers for
//! the Brownian-functional limit laws, and Monte Carlo tooling that compares
//! finite-sample distributions with their limits.
//!
//! Everything is generic over the floating-point type; the `*64` aliases fix
//! it to `f64`.

// `!(x > 0)` is how NaN gets rejected; dense kernels index by position.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod cd;
pub mod dgp;
pub mod error;
pub mod estimators;
pub mod extended;
pub mod limitdist;
pub mod linalg;
pub mod montecarlo;
pub mod rng;
pub mod scalar;
pub mod tuning;

pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use linalg::Matrix;
pub use scalar::Scalar;
pub use tuning::TuningRule;

pub type Matrix64 = Matrix<f64>;
pub type ExtendedReal64 = ExtendedReal<f64>;
pub type TuningRule64 = TuningRule<f64>;
pub type ModelConfig64 = dgp::ModelConfig<f64>;
pub type CoefficientPath64 = dgp::CoefficientPath<f64>;
pub type Dataset64 = estimators::Dataset<f64>;
pub type FitResult64 = estimators::FitResult<f64>;
pub type TuningParams64 = estimators::TuningParams<f64>;
pub type BrownianGrid64 = limitdist::BrownianGrid<f64>;
pub type FunctionalSample64 = limitdist::FunctionalSample<f64>;
pub type LimitParams64 = limitdist::LimitParams<f64>;
pub type ExperimentPlan64 = montecarlo::ExperimentPlan<f64>;
pub type CellResult64 = montecarlo::CellResult<f64>;
pub type MixedDistributionSummary64 = montecarlo::MixedDistributionSummary<f64>;
