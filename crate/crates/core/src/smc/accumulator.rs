use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Posterior cross-covariance `Cov(theta~_s, theta~_t | y_{1:horizon})`, `s < t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCovariance<T> {
    pub s: usize,
    pub t: usize,
    pub horizon: usize,
    pub matrix: Matrix<T>,
}

/// Fixed-lag posterior moments of the per-step perturbed parameters.
///
/// Times are 1-based. The moments for time `t` are read at horizon
/// `min(t + lag, T)`; pairs `(s, t)` with `1 <= t - s <= lag` are read at the
/// horizon of `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedLagAccumulator<T> {
    dim: usize,
    lag: usize,
    means: Vec<Option<Vec<T>>>,
    variances: Vec<Option<Matrix<T>>>,
    horizons: Vec<usize>,
    cross: Vec<CrossCovariance<T>>,
    loglik: T,
    ess: Vec<T>,
}

impl<T: Real> FixedLagAccumulator<T> {
    /// Empty accumulator for `horizon` steps. `lag` is clipped to `horizon - 1`.
    pub fn new(dim: usize, horizon: usize, lag: usize) -> Self {
        Self {
            dim,
            lag: lag.min(horizon.saturating_sub(1)),
            means: vec![None; horizon],
            variances: vec![None; horizon],
            horizons: vec![0; horizon],
            cross: Vec::new(),
            loglik: T::zero(),
            ess: Vec::with_capacity(horizon),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of time steps `T`.
    pub fn horizon(&self) -> usize {
        self.means.len()
    }

    /// Effective lag, `min(lag, T - 1)`.
    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn mean(&self, t: usize) -> Option<&[T]> {
        self.means.get(t.wrapping_sub(1))?.as_deref()
    }

    pub fn variance(&self, t: usize) -> Option<&Matrix<T>> {
        self.variances.get(t.wrapping_sub(1))?.as_ref()
    }

    /// Horizon at which the moments of `t` were read; 0 if not yet read.
    pub fn readoff_horizon(&self, t: usize) -> usize {
        self.horizons.get(t.wrapping_sub(1)).copied().unwrap_or(0)
    }

    pub fn cross_covariances(&self) -> &[CrossCovariance<T>] {
        &self.cross
    }

    /// Running SMC estimate of the log-likelihood of the perturbed model.
    pub fn loglik(&self) -> T {
        self.loglik
    }

    /// Effective sample size after weighting, one entry per step.
    pub fn ess(&self) -> &[T] {
        &self.ess
    }

    pub fn set_moments(&mut self, t: usize, horizon: usize, mean: Vec<T>, variance: Matrix<T>) {
        debug_assert!(self.means[t - 1].is_none(), "moments for t = {t} recorded twice");
        self.means[t - 1] = Some(mean);
        self.variances[t - 1] = Some(variance);
        self.horizons[t - 1] = horizon;
    }

    pub fn push_cross(&mut self, c: CrossCovariance<T>) {
        self.cross.push(c);
    }

    pub(crate) fn add_loglik(&mut self, inc: T) {
        self.loglik += inc;
    }

    pub(crate) fn push_ess(&mut self, ess: T) {
        self.ess.push(ess);
    }

    /// Number of `(s, t)` pairs with `1 <= t - s <= lag`.
    pub fn expected_pairs(&self) -> usize {
        (1..=self.horizon()).map(|t| self.lag.min(t - 1)).sum()
    }

    /// Checks that every time step and every within-lag pair is present
    /// exactly once.
    pub fn check_complete(&self) -> Result<()> {
        if let Some(t) = self.means.iter().position(Option::is_none) {
            return Err(Error::IncompleteAccumulator(format!("no moments for t = {}", t + 1)));
        }
        if self.cross.len() != self.expected_pairs() {
            return Err(Error::IncompleteAccumulator(format!(
                "{} cross-covariances, expected {}",
                self.cross.len(),
                self.expected_pairs()
            )));
        }
        let mut seen = std::collections::HashSet::with_capacity(self.cross.len());
        for c in &self.cross {
            if c.s >= c.t || c.t - c.s > self.lag || c.t > self.horizon() || !seen.insert((c.s, c.t)) {
                return Err(Error::IncompleteAccumulator(format!("unexpected pair ({}, {})", c.s, c.t)));
            }
        }
        Ok(())
    }

    /// `t,component,mean,var_diag` rows; components are 0-based.
    pub fn write_moments_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,component,mean,var_diag")?;
        for t in 1..=self.horizon() {
            let (Some(m), Some(v)) = (self.mean(t), self.variance(t)) else { continue };
            for i in 0..self.dim {
                writeln!(w, "{},{},{},{}", t, i, m[i], v[(i, i)])?;
            }
        }
        Ok(())
    }

    /// `s,t,i,j,crosscov` rows.
    pub fn write_crosscov_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "s,t,i,j,crosscov")?;
        for c in &self.cross {
            for ((i, j), v) in c.matrix.iter() {
                writeln!(w, "{},{},{},{},{}", c.s, c.t, i, j, v)?;
            }
        }
        Ok(())
    }
}
