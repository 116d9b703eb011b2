//! Regional adaptive random-walk Metropolis with online recursion.
//!
//! The state space is partitioned by a Gaussian mixture fitted to the chain
//! output with online EM; each region gets its own proposal covariance and a
//! whole-space component keeps traffic flowing between regions. The crate also
//! ships the Adaptive Metropolis and fixed-boundary regional baselines, pooled
//! inter-chain adaptation, ECDF-distance diagnostics and an experiment harness.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which the harness uses.

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod inca;
pub mod linalg;
pub mod mixture;
pub mod mvn;
pub mod samplers;
pub mod scalar;
pub mod targets;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = linalg::Matrix<f64>;
pub type CovMatrix = mvn::CovMatrix<f64>;
pub type GaussianParams = mvn::GaussianParams<f64>;
pub type MixtureState = mixture::MixtureState<f64>;
pub type SuffStats = mixture::SuffStats<f64>;
pub type OnlineEm = mixture::OnlineEm<f64>;
pub type GaussMixSpec = targets::GaussMixSpec<f64>;
pub type BananaSpec = targets::BananaSpec<f64>;
pub type TargetModel = targets::TargetModel<f64>;

pub type CovMatrixF32 = mvn::CovMatrix<f32>;
pub type MixtureStateF32 = mixture::MixtureState<f32>;
