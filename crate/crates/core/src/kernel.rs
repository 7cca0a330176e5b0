//! Gaussian artificial prior placed around a parameter value.
//!
//! The kernel is a centered Gaussian with diagonal covariance
//! `diag(sigma_i^2)`. Scaled by `tau` and centered at `theta` it yields
//! perturbed parameters `theta + tau * (sigma ⊙ z)` with `z` standard
//! normal. The product form and Gaussian kurtosis (`E[u_i^4] = 3 sigma_i^4`)
//! are what make posterior covariances usable as curvature estimates.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Strictly positive shrinkage scale `tau`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Tau<T>(T);

impl<T: Real> Tau<T> {
    pub fn new(tau: T) -> Result<Self> {
        if tau > T::zero() && tau.is_finite() {
            Ok(Self(tau))
        } else {
            Err(Error::InvalidScale(tau.to_f64_lossy()))
        }
    }

    #[inline]
    pub fn get(self) -> T {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationKernel<T> {
    sigmas: Vec<T>,
}

impl<T: Real> PerturbationKernel<T> {
    /// Gaussian product kernel with per-coordinate standard deviations.
    pub fn gaussian(sigmas: Vec<T>) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::InvalidKernel("at least one coordinate is required".into()));
        }
        if let Some((i, s)) = sigmas.iter().enumerate().find(|(_, &s)| !(s > T::zero() && s.is_finite())) {
            return Err(Error::InvalidKernel(format!("sigma[{i}] = {s} is not strictly positive")));
        }
        Ok(Self { sigmas })
    }

    /// Kernel with the same standard deviation on every coordinate.
    pub fn isotropic(dim: usize, sigma: T) -> Result<Self> {
        Self::gaussian(vec![sigma; dim])
    }

    pub fn dim(&self) -> usize {
        self.sigmas.len()
    }

    pub fn sigmas(&self) -> &[T] {
        &self.sigmas
    }

    /// Diagonal entry `Sigma_ii = sigma_i^2`.
    pub fn variance(&self, i: usize) -> Result<T> {
        self.sigmas
            .get(i)
            .map(|&s| s * s)
            .ok_or(Error::IndexOutOfRange { index: i, len: self.dim() })
    }

    pub fn covariance(&self) -> Matrix<T> {
        Matrix::from_diagonal(&self.sigmas.iter().map(|&s| s * s).collect::<Vec<_>>())
    }

    /// Analytic fourth moment `E[u_i^4] = 3 sigma_i^4` (zero-based index).
    pub fn fourth_moment(&self, i: usize) -> Result<T> {
        let v = self.variance(i)?;
        Ok(T::of(3.0) * v * v)
    }

    /// Maps an injected standard normal vector to a perturbed parameter.
    pub fn perturb_with(&self, center: &[T], tau: T, z: &[T]) -> Result<Vec<T>> {
        self.check_dim(center.len())?;
        self.check_dim(z.len())?;
        Ok(center
            .iter()
            .zip(&self.sigmas)
            .zip(z)
            .map(|((&c, &s), &zi)| c + tau * (s * zi))
            .collect())
    }

    /// Draws `theta~ ~ N(center, tau^2 Sigma)`. `tau = 0` returns the center.
    pub fn sample(&self, center: &[T], tau: T, rng: &mut dyn RngCore) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); center.len()];
        self.sample_into(center, tau, rng, &mut out)?;
        Ok(out)
    }

    /// Allocation-free variant of [`sample`](Self::sample). Always consumes
    /// exactly `dim` standard normals from `rng`, including when `tau = 0`.
    pub fn sample_into<R: RngCore + ?Sized>(
        &self,
        center: &[T],
        tau: T,
        rng: &mut R,
        out: &mut [T],
    ) -> Result<()> {
        self.check_dim(center.len())?;
        self.check_dim(out.len())?;
        if !(tau >= T::zero()) {
            return Err(Error::InvalidScale(tau.to_f64_lossy()));
        }
        for ((o, &c), &s) in out.iter_mut().zip(center).zip(&self.sigmas) {
            let z: f64 = rng.sample(StandardNormal);
            *o = c + tau * (s * T::of(z));
        }
        Ok(())
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), found })
        }
    }
}
