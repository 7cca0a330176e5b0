use super::importance::weighted_mean_cov;
use super::{LogLikelihood, PosteriorMoments};
use crate::error::{Error, Result};
use crate::kernel::{PerturbationKernel, Tau};
use crate::rng::stream;
use crate::scalar::Real;
use crate::weights::{effective_sample_size, normalize_log_weights, Normalized};

/// Tensor trapezoidal grid around the center, in prior standard deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub half_width_sds: f64,
    pub points_per_axis: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { half_width_sds: 8.0, points_per_axis: 2001 }
    }
}

pub const MAX_QUADRATURE_DIM: usize = 2;

/// Exact (up to grid resolution) artificial-posterior moments by
/// trapezoidal quadrature, for `d <= 2`.
///
/// The evaluator is called once per node with a fixed stream; it is meant
/// for noise-free likelihoods.
pub fn posterior_moments_quadrature<T, L>(
    model: &L,
    theta: &[T],
    tau: Tau<T>,
    kernel: &PerturbationKernel<T>,
    grid: GridSpec,
) -> Result<PosteriorMoments<T>>
where
    T: Real,
    L: LogLikelihood<T> + ?Sized,
{
    let d = kernel.dim();
    if d > MAX_QUADRATURE_DIM {
        return Err(Error::UnsupportedDimension { max: MAX_QUADRATURE_DIM, found: d });
    }
    kernel.check_dim(model.dim())?;
    kernel.check_dim(theta.len())?;
    if grid.half_width_sds < 8.0 || grid.points_per_axis < 2001 {
        return Err(Error::InvalidGrid(format!(
            "need >= 8 prior sds and >= 2001 points per axis, got {} and {}",
            grid.half_width_sds, grid.points_per_axis
        )));
    }

    let m = grid.points_per_axis;
    let step = 2.0 * grid.half_width_sds / (m - 1) as f64;
    // Standardized abscissae and trapezoid log-weights per axis.
    let axis: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let z = -grid.half_width_sds + step * k as f64;
            let w = if k == 0 || k == m - 1 { 0.5f64 } else { 1.0 };
            (z, w.ln())
        })
        .collect();

    let nodes = m.pow(d as u32);
    let scales: Vec<T> = kernel.sigmas().iter().map(|&s| tau.get() * s).collect();
    let mut offsets = vec![T::zero(); nodes * d];
    let mut log_w = vec![T::zero(); nodes];
    let mut point = theta.to_vec();
    let mut rng = stream(0);
    let mut idx = vec![0usize; d];
    for node in 0..nodes {
        let mut rem = node;
        for slot in idx.iter_mut().rev() {
            *slot = rem % m;
            rem /= m;
        }
        let mut log_prior_and_rule = 0.0f64;
        for (i, &k) in idx.iter().enumerate() {
            let (z, lw) = axis[k];
            let u = scales[i] * T::of(z);
            offsets[node * d + i] = u;
            point[i] = theta[i] + u;
            log_prior_and_rule += lw - 0.5 * z * z;
        }
        log_w[node] = model.log_likelihood(&point, &mut rng) + T::of(log_prior_and_rule);
    }

    let mut w = vec![T::zero(); nodes];
    match normalize_log_weights(&log_w, &mut w) {
        Normalized::Ok { .. } => {}
        Normalized::AllZero => return Err(Error::DegeneratePosterior),
        Normalized::NonFinite => {
            return Err(Error::NonFiniteEvaluation { context: "quadrature log-likelihood".into() })
        }
    }
    let (offset_mean, covariance) = weighted_mean_cov(&offsets, d, &w);
    let mean = theta.iter().zip(&offset_mean).map(|(&c, &o)| c + o).collect();
    Ok(PosteriorMoments { mean, covariance, ess: effective_sample_size(&w), n: nodes })
}
