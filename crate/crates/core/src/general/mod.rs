//! Estimators for generic models given only a (possibly noisy)
//! log-likelihood evaluator.

mod finite_diff;
mod importance;
mod models;
mod quadrature;

pub use finite_diff::{fd_evaluations, fd_oim, fd_score, FdConfig};
pub(crate) use importance::{weighted_mean, weighted_mean_cov};
pub use importance::{oim_general, posterior_moments_is, score_general, PosteriorMoments};
pub use models::{ExactDerivatives, FnLogLikelihood, GaussianLikelihood, NegQuartic, PoissonLikelihood};
pub use quadrature::{posterior_moments_quadrature, GridSpec};

use rand::RngCore;

use crate::scalar::Real;

/// A log-likelihood evaluator `theta -> l(theta)`.
///
/// Implementations must be deterministic given the same inputs and the same
/// random stream. Exact models ignore `rng`; Monte Carlo estimators draw
/// from it. An impossible parameter is signalled by `-inf`.
pub trait LogLikelihood<T: Real>: Sync {
    fn dim(&self) -> usize;

    fn log_likelihood(&self, theta: &[T], rng: &mut dyn RngCore) -> T;
}

impl<T: Real, L: LogLikelihood<T> + ?Sized> LogLikelihood<T> for &L {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn log_likelihood(&self, theta: &[T], rng: &mut dyn RngCore) -> T {
        (**self).log_likelihood(theta, rng)
    }
}
