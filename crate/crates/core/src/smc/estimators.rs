use super::FixedLagAccumulator;
use crate::error::Result;
use crate::estimate::{EstimateMeta, InfoMatrix, Method, ScoreVector};
use crate::kernel::{PerturbationKernel, Tau};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// `tau^-2 Sigma^-1 (sum_t E[theta~_t | y_{1:(t+lag)^T}] - T theta)`.
pub fn score_ssm<T: Real>(
    acc: &FixedLagAccumulator<T>,
    theta: &[T],
    tau: Tau<T>,
    kernel: &PerturbationKernel<T>,
) -> Result<ScoreVector<T>> {
    acc.check_complete()?;
    kernel.check_dim(theta.len())?;
    kernel.check_dim(acc.dim())?;
    let mut total = vec![T::zero(); theta.len()];
    for t in 1..=acc.horizon() {
        let m = acc.mean(t).expect("checked complete");
        for ((s, &mi), &c) in total.iter_mut().zip(m).zip(theta) {
            *s += mi - c;
        }
    }
    let t2 = tau.get() * tau.get();
    let values = total.iter().zip(kernel.sigmas()).map(|(&s, &sig)| s / (t2 * sig * sig)).collect();
    Ok(ScoreVector { values, meta: EstimateMeta::new(Method::FixedLagSmc, 0).with_tau(tau.get()) })
}

/// `-tau^-4 Sigma^-1 { sum_t V_t + sum_pairs (C_st + C_st^T) - tau^2 T Sigma } Sigma^-1`.
pub fn oim_ssm<T: Real>(
    acc: &FixedLagAccumulator<T>,
    tau: Tau<T>,
    kernel: &PerturbationKernel<T>,
) -> Result<InfoMatrix<T>> {
    acc.check_complete()?;
    kernel.check_dim(acc.dim())?;
    let d = acc.dim();
    let mut total = Matrix::zeros(d);
    for t in 1..=acc.horizon() {
        total.add_assign(acc.variance(t).expect("checked complete"));
    }
    for c in acc.cross_covariances() {
        total.add_assign(&c.matrix);
        total.add_assign(&c.matrix.transpose());
    }
    let t2 = tau.get() * tau.get();
    let horizon = T::of_usize(acc.horizon());
    let s2: Vec<T> = kernel.sigmas().iter().map(|&s| s * s).collect();
    let mut out = Matrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let prior = if i == j { t2 * horizon * s2[i] } else { T::zero() };
            out[(i, j)] = (prior - total[(i, j)]) / (t2 * t2 * s2[i] * s2[j]);
        }
    }
    Ok(InfoMatrix::new(out, EstimateMeta::new(Method::FixedLagSmc, 0).with_tau(tau.get())))
}
