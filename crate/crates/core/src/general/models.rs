use rand::RngCore;

use super::{LogLikelihood, PosteriorMoments};
use crate::error::{Error, Result};
use crate::kernel::{PerturbationKernel, Tau};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Analytic derivatives, used as ground truth for noise-free models.
pub trait ExactDerivatives<T: Real> {
    fn score(&self, theta: &[T]) -> Vec<T>;

    /// Negative Hessian of the log-likelihood.
    fn observed_information(&self, theta: &[T]) -> Matrix<T>;
}

/// Wraps a closure as a [`LogLikelihood`].
pub struct FnLogLikelihood<F> {
    dim: usize,
    f: F,
}

impl<F> FnLogLikelihood<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T, F> LogLikelihood<T> for FnLogLikelihood<F>
where
    T: Real,
    F: Fn(&[T], &mut dyn RngCore) -> T + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_likelihood(&self, theta: &[T], rng: &mut dyn RngCore) -> T {
        (self.f)(theta, rng)
    }
}

/// Independent Gaussian likelihood `l(theta) = -sum (theta_i - y_i)^2 / (2 s_i^2)`.
///
/// Combined with the Gaussian kernel this is the conjugate model: the
/// artificial posterior is Gaussian and its moments are known exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLikelihood<T> {
    observations: Vec<T>,
    scales: Vec<T>,
}

impl<T: Real> GaussianLikelihood<T> {
    pub fn new(observations: Vec<T>, scales: Vec<T>) -> Result<Self> {
        if observations.is_empty() || observations.len() != scales.len() {
            return Err(Error::DimensionMismatch { expected: observations.len(), found: scales.len() });
        }
        if scales.iter().any(|&s| !(s > T::zero())) {
            return Err(Error::InvalidParameter("likelihood scales must be positive".into()));
        }
        Ok(Self { observations, scales })
    }

    /// Unit-scale likelihood centered at `observations`.
    pub fn unit(observations: Vec<T>) -> Self {
        let scales = vec![T::one(); observations.len()];
        Self { observations, scales }
    }

    /// Exact artificial-posterior moments under the Gaussian kernel.
    pub fn conjugate_moments(
        &self,
        theta: &[T],
        tau: Tau<T>,
        kernel: &PerturbationKernel<T>,
    ) -> Result<PosteriorMoments<T>> {
        kernel.check_dim(self.observations.len())?;
        kernel.check_dim(theta.len())?;
        let tau = tau.get();
        let mut mean = Vec::with_capacity(theta.len());
        let mut var = Vec::with_capacity(theta.len());
        for i in 0..theta.len() {
            let prior_var = tau * tau * kernel.variance(i)?;
            let lik_var = self.scales[i] * self.scales[i];
            let post_var = prior_var * lik_var / (prior_var + lik_var);
            let shift = prior_var * (self.observations[i] - theta[i]) / (prior_var + lik_var);
            mean.push(theta[i] + shift);
            var.push(post_var);
        }
        Ok(PosteriorMoments::exact(mean, Matrix::from_diagonal(&var)))
    }
}

impl<T: Real> LogLikelihood<T> for GaussianLikelihood<T> {
    fn dim(&self) -> usize {
        self.observations.len()
    }

    fn log_likelihood(&self, theta: &[T], _rng: &mut dyn RngCore) -> T {
        let half = T::of(0.5);
        theta
            .iter()
            .zip(&self.observations)
            .zip(&self.scales)
            .map(|((&t, &y), &s)| {
                let r = (t - y) / s;
                -half * r * r
            })
            .sum()
    }
}

impl<T: Real> ExactDerivatives<T> for GaussianLikelihood<T> {
    fn score(&self, theta: &[T]) -> Vec<T> {
        theta
            .iter()
            .zip(&self.observations)
            .zip(&self.scales)
            .map(|((&t, &y), &s)| -(t - y) / (s * s))
            .collect()
    }

    fn observed_information(&self, _theta: &[T]) -> Matrix<T> {
        Matrix::from_diagonal(&self.scales.iter().map(|&s| T::one() / (s * s)).collect::<Vec<_>>())
    }
}

/// Poisson log-likelihood in the log-rate, `l(theta) = y theta - exp(theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonLikelihood<T> {
    pub count: T,
}

impl<T: Real> LogLikelihood<T> for PoissonLikelihood<T> {
    fn dim(&self) -> usize {
        1
    }

    fn log_likelihood(&self, theta: &[T], _rng: &mut dyn RngCore) -> T {
        self.count * theta[0] - theta[0].exp()
    }
}

impl<T: Real> ExactDerivatives<T> for PoissonLikelihood<T> {
    fn score(&self, theta: &[T]) -> Vec<T> {
        vec![self.count - theta[0].exp()]
    }

    fn observed_information(&self, theta: &[T]) -> Matrix<T> {
        Matrix::from_diagonal(&[theta[0].exp()])
    }
}

/// `l(theta) = -sum theta_i^4`; non-quadratic, so finite differences are
/// biased on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegQuartic {
    pub dim: usize,
}

impl<T: Real> LogLikelihood<T> for NegQuartic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_likelihood(&self, theta: &[T], _rng: &mut dyn RngCore) -> T {
        theta.iter().map(|&t| -(t * t * t * t)).sum()
    }
}

impl<T: Real> ExactDerivatives<T> for NegQuartic {
    fn score(&self, theta: &[T]) -> Vec<T> {
        theta.iter().map(|&t| T::of(-4.0) * t * t * t).collect()
    }

    fn observed_information(&self, theta: &[T]) -> Matrix<T> {
        Matrix::from_diagonal(&theta.iter().map(|&t| T::of(12.0) * t * t).collect::<Vec<_>>())
    }
}
