use rand::RngCore;

use super::LogLikelihood;
use crate::error::{Error, Result};
use crate::estimate::{EstimateMeta, InfoMatrix, Method, ScoreVector};
use crate::kernel::{PerturbationKernel, Tau};
use crate::linalg::Matrix;
use crate::scalar::Real;
use crate::weights::{effective_sample_size, normalize_log_weights, Normalized};

/// Mean and covariance of the artificial posterior over the perturbed
/// parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMoments<T> {
    pub mean: Vec<T>,
    pub covariance: Matrix<T>,
    /// `1 / sum w_i^2`; infinite for closed-form moments.
    pub ess: T,
    /// Number of samples or quadrature nodes; zero for closed-form moments.
    pub n: usize,
}

impl<T: Real> PosteriorMoments<T> {
    /// Moments known analytically.
    pub fn exact(mean: Vec<T>, covariance: Matrix<T>) -> Self {
        Self { mean, covariance, ess: T::infinity(), n: 0 }
    }
}

pub(crate) fn weighted_mean<T: Real>(points: &[T], d: usize, weights: &[T]) -> Vec<T> {
    let mut mean = vec![T::zero(); d];
    for (p, &w) in points.chunks_exact(d).zip(weights) {
        for (m, &x) in mean.iter_mut().zip(p) {
            *m += w * x;
        }
    }
    mean
}

/// Weighted mean and plug-in covariance of `points` (row-major, `n x d`)
/// under normalized `weights`. The covariance is exactly symmetric.
pub(crate) fn weighted_mean_cov<T: Real>(points: &[T], d: usize, weights: &[T]) -> (Vec<T>, Matrix<T>) {
    let mean = weighted_mean(points, d, weights);
    let mut cov = Matrix::zeros(d);
    let mut dev = vec![T::zero(); d];
    for (p, &w) in points.chunks_exact(d).zip(weights) {
        for ((dv, &x), &m) in dev.iter_mut().zip(p).zip(&mean) {
            *dv = x - m;
        }
        for i in 0..d {
            let wi = w * dev[i];
            for j in i..d {
                cov[(i, j)] += wi * dev[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            cov[(i, j)] = cov[(j, i)];
        }
    }
    (mean, cov)
}

/// Self-normalized importance sampling of the artificial posterior using
/// the scaled kernel as proposal.
///
/// Each of the `n` iterations draws one perturbed parameter from `rng` and
/// then evaluates the log-likelihood with the same stream.
pub fn posterior_moments_is<T, L, R>(
    model: &L,
    theta: &[T],
    tau: Tau<T>,
    kernel: &PerturbationKernel<T>,
    n: usize,
    rng: &mut R,
) -> Result<PosteriorMoments<T>>
where
    T: Real,
    L: LogLikelihood<T> + ?Sized,
    R: RngCore,
{
    if n < 2 {
        return Err(Error::InsufficientSamples { required: 2, found: n });
    }
    let d = kernel.dim();
    kernel.check_dim(model.dim())?;
    kernel.check_dim(theta.len())?;

    let zeros = vec![T::zero(); d];
    let mut offsets = vec![T::zero(); n * d];
    let mut log_w = vec![T::zero(); n];
    let mut perturbed = vec![T::zero(); d];
    for (u, lw) in offsets.chunks_exact_mut(d).zip(log_w.iter_mut()) {
        kernel.sample_into(&zeros, tau.get(), rng, u)?;
        for ((p, &c), &ui) in perturbed.iter_mut().zip(theta).zip(u.iter()) {
            *p = c + ui;
        }
        *lw = model.log_likelihood(&perturbed, rng);
    }

    let mut w = vec![T::zero(); n];
    match normalize_log_weights(&log_w, &mut w) {
        Normalized::Ok { .. } => {}
        Normalized::AllZero => return Err(Error::DegeneratePosterior),
        Normalized::NonFinite => {
            return Err(Error::NonFiniteEvaluation { context: "importance sampling log-likelihood".into() })
        }
    }
    let (offset_mean, covariance) = weighted_mean_cov(&offsets, d, &w);
    let mean = theta.iter().zip(&offset_mean).map(|(&c, &m)| c + m).collect();
    Ok(PosteriorMoments { mean, covariance, ess: effective_sample_size(&w), n })
}

/// Score estimate `tau^-2 Sigma^-1 (mean - theta)`.
pub fn score_general<T: Real>(
    moments: &PosteriorMoments<T>,
    theta: &[T],
    tau: Tau<T>,
    kernel: &PerturbationKernel<T>,
) -> Result<ScoreVector<T>> {
    kernel.check_dim(theta.len())?;
    kernel.check_dim(moments.mean.len())?;
    if moments.mean.iter().any(|m| !m.is_finite()) {
        return Err(Error::NonFiniteEvaluation { context: "posterior mean".into() });
    }
    let t2 = tau.get() * tau.get();
    let values = theta
        .iter()
        .zip(&moments.mean)
        .zip(kernel.sigmas())
        .map(|((&c, &m), &s)| (m - c) / (t2 * s * s))
        .collect();
    Ok(ScoreVector { values, meta: meta_for(moments).with_tau(tau.get()) })
}

/// Observed information estimate `tau^-4 Sigma^-1 (tau^2 Sigma - cov) Sigma^-1`.
pub fn oim_general<T: Real>(
    moments: &PosteriorMoments<T>,
    tau: Tau<T>,
    kernel: &PerturbationKernel<T>,
) -> Result<InfoMatrix<T>> {
    let d = kernel.dim();
    kernel.check_dim(moments.covariance.dim())?;
    let t2 = tau.get() * tau.get();
    let t4 = t2 * t2;
    let s2: Vec<T> = kernel.sigmas().iter().map(|&s| s * s).collect();
    let mut out = Matrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let prior = if i == j { t2 * s2[i] } else { T::zero() };
            out[(i, j)] = (prior - moments.covariance[(i, j)]) / (t4 * s2[i] * s2[j]);
        }
    }
    Ok(InfoMatrix::new(out, meta_for(moments).with_tau(tau.get())))
}

fn meta_for<T: Real>(m: &PosteriorMoments<T>) -> EstimateMeta<T> {
    let method = if m.n == 0 { Method::ClosedForm } else { Method::ImportanceSampling };
    EstimateMeta::new(method, m.n)
}
