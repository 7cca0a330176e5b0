//! Derivative-free estimation of the score vector and observed
//! information matrix.
//!
//! A Gaussian artificial prior of scale `tau` is placed around the
//! parameter `theta`; the resulting pseudo-posterior mean and covariance
//! encode the gradient and negative Hessian of the log-likelihood up to
//! `O(tau^2)`. For generic models the moments come from importance sampling
//! or quadrature ([`general`]); for state-space models with sample-only
//! dynamics they come from a bootstrap particle filter on a model whose
//! parameter is perturbed independently at every step, read off with a
//! fixed lag ([`smc`]). Finite-difference baselines and exact oracles
//! (closed form, quadrature, Kalman) are provided for comparison, and
//! [`harness`] drives seeded sweeps that emit CSV.
//!
//! Everything numerical is generic over [`Real`]; the aliases below fix the
//! common `f64` instantiations.

pub mod error;
pub mod estimate;
pub mod general;
pub mod harness;
pub mod kernel;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod smc;
pub mod ssm;
pub mod weights;

pub use error::{Error, Result};
pub use estimate::{EstimateMeta, InfoMatrix, Method, ScoreVector};
pub use kernel::{PerturbationKernel, Tau};
pub use linalg::Matrix;
pub use scalar::Real;

pub type Kernel64 = kernel::PerturbationKernel<f64>;
pub type Kernel32 = kernel::PerturbationKernel<f32>;
pub type Score64 = estimate::ScoreVector<f64>;
pub type Info64 = estimate::InfoMatrix<f64>;
pub type Moments64 = general::PosteriorMoments<f64>;
pub type Moments32 = general::PosteriorMoments<f32>;
pub type Accumulator64 = smc::FixedLagAccumulator<f64>;
pub type FilterConfig64 = smc::ExtendedFilterConfig<f64>;
pub type Lgssm64 = ssm::Lgssm<f64>;
pub type Observations64 = ssm::ObservationSequence<f64>;
