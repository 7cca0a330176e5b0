//! Scalar AR(1)-plus-noise model with exact Kalman likelihood.
//!
//! ```text
//! x_1 ~ N(m_1, P_1)
//! x_t = phi x_{t-1} + sigma_v v_t
//! y_t = x_t + sigma_w w_t
//! ```
//!
//! The free coordinates of `theta` are a subset of
//! `(phi, log sigma_v, log sigma_w)`, in that order; the others stay at the
//! base values. `phi` enters through the identity clamped to
//! `[-PHI_BOUND, PHI_BOUND]`.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::richardson::richardson_derivatives;
use super::{ObservationSequence, StateSpaceModel};
use crate::error::{Error, Result};
use crate::estimate::{EstimateMeta, InfoMatrix, Method, ScoreVector};
use crate::linalg::Matrix;
use crate::scalar::Real;

pub const PHI_BOUND: f64 = 0.999;

/// Discrepancy above which the derivative oracle reports a warning.
pub const ORACLE_ACCURACY_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgssmParams<T> {
    pub phi: T,
    pub sigma_v: T,
    pub sigma_w: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LgssmCoord {
    Phi,
    LogSigmaV,
    LogSigmaW,
}

impl LgssmCoord {
    pub const ALL: [LgssmCoord; 3] = [LgssmCoord::Phi, LgssmCoord::LogSigmaV, LgssmCoord::LogSigmaW];

    pub fn name(self) -> &'static str {
        match self {
            LgssmCoord::Phi => "phi",
            LgssmCoord::LogSigmaV => "log_sigma_v",
            LgssmCoord::LogSigmaW => "log_sigma_w",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialLaw<T> {
    /// `N(0, sigma_v^2 / (1 - phi^2))`.
    Stationary,
    Fixed { mean: T, variance: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lgssm<T> {
    base: LgssmParams<T>,
    free: Vec<LgssmCoord>,
    init: InitialLaw<T>,
}

impl<T: Real> Lgssm<T> {
    pub fn new(base: LgssmParams<T>, free: Vec<LgssmCoord>, init: InitialLaw<T>) -> Result<Self> {
        if free.is_empty() {
            return Err(Error::InvalidParameter("at least one free coordinate is required".into()));
        }
        for (i, c) in free.iter().enumerate() {
            if free[..i].contains(c) {
                return Err(Error::InvalidParameter(format!("duplicate coordinate {}", c.name())));
            }
        }
        if !(base.sigma_v > T::zero() && base.sigma_w > T::zero()) {
            return Err(Error::InvalidParameter("noise scales must be positive".into()));
        }
        match init {
            InitialLaw::Stationary if base.phi.abs() >= T::one() => {
                return Err(Error::InvalidParameter("stationary initial law needs |phi| < 1".into()))
            }
            InitialLaw::Fixed { variance, .. } if !(variance > T::zero()) => {
                return Err(Error::InvalidParameter("initial variance must be positive".into()))
            }
            _ => {}
        }
        Ok(Self { base, free, init })
    }

    /// All three coordinates free, stationary start. Panics on invalid `base`.
    pub fn standard(base: LgssmParams<T>) -> Self {
        Self::new(base, LgssmCoord::ALL.to_vec(), InitialLaw::Stationary).expect("valid LGSSM parameters")
    }

    pub fn base(&self) -> LgssmParams<T> {
        self.base
    }

    pub fn free(&self) -> &[LgssmCoord] {
        &self.free
    }

    /// Unconstrained coordinates of `params` for the free subset.
    pub fn theta_of(&self, params: &LgssmParams<T>) -> Vec<T> {
        self.free
            .iter()
            .map(|c| match c {
                LgssmCoord::Phi => params.phi,
                LgssmCoord::LogSigmaV => params.sigma_v.ln(),
                LgssmCoord::LogSigmaW => params.sigma_w.ln(),
            })
            .collect()
    }

    /// Maps `theta` to model parameters. Never fails for finite input.
    pub fn map_params(&self, theta: &[T]) -> LgssmParams<T> {
        let bound = T::of(PHI_BOUND);
        let mut p = self.base;
        for (c, &v) in self.free.iter().zip(theta) {
            match c {
                LgssmCoord::Phi => p.phi = v.max(-bound).min(bound),
                LgssmCoord::LogSigmaV => p.sigma_v = v.exp(),
                LgssmCoord::LogSigmaW => p.sigma_w = v.exp(),
            }
        }
        p
    }

    /// Checked variant of [`map_params`](Self::map_params).
    pub fn params(&self, theta: &[T]) -> Result<LgssmParams<T>> {
        if theta.len() != self.free.len() {
            return Err(Error::DimensionMismatch { expected: self.free.len(), found: theta.len() });
        }
        let p = self.map_params(theta);
        let ok = |v: T| v > T::zero() && v.is_finite();
        if !(ok(p.sigma_v * p.sigma_v) && ok(p.sigma_w * p.sigma_w) && p.phi.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-positive or non-finite variance at theta = {theta:?}")));
        }
        Ok(p)
    }

    fn initial_moments(&self, p: &LgssmParams<T>) -> (T, T) {
        match self.init {
            InitialLaw::Stationary => (T::zero(), p.sigma_v * p.sigma_v / (T::one() - p.phi * p.phi)),
            InitialLaw::Fixed { mean, variance } => (mean, variance),
        }
    }

    /// Exact log-likelihood by the prediction error decomposition.
    pub fn kalman_loglik(&self, theta: &[T], obs: &ObservationSequence<T>) -> Result<T> {
        let p = self.params(theta)?;
        let (mut m, mut var) = self.initial_moments(&p);
        let r = p.sigma_w * p.sigma_w;
        let q = p.sigma_v * p.sigma_v;
        let ln_2pi = T::of(std::f64::consts::TAU.ln());
        let half = T::of(0.5);
        let mut ll = T::zero();
        for (t, &y) in obs.values().iter().enumerate() {
            if t > 0 {
                m = p.phi * m;
                var = p.phi * p.phi * var + q;
            }
            let s = var + r;
            let e = y - m;
            ll -= half * (ln_2pi + s.ln() + e * e / s);
            let gain = var / s;
            m += gain * e;
            var = (T::one() - gain) * var;
        }
        Ok(ll)
    }

    /// Marginal variance of `x_t` (1-based) under the model.
    pub fn state_variance(&self, theta: &[T], t: usize) -> Result<T> {
        let p = self.params(theta)?;
        let (_, mut var) = self.initial_moments(&p);
        for _ in 1..t {
            var = p.phi * p.phi * var + p.sigma_v * p.sigma_v;
        }
        Ok(var)
    }
}

impl<T: Real> StateSpaceModel<T> for Lgssm<T> {
    type State = T;

    fn param_dim(&self) -> usize {
        self.free.len()
    }

    fn sample_initial(&self, theta: &[T], rng: &mut dyn RngCore) -> T {
        let p = self.map_params(theta);
        let (m, v) = self.initial_moments(&p);
        let z: f64 = rng.sample(StandardNormal);
        m + v.sqrt() * T::of(z)
    }

    fn sample_transition(&self, prev: &T, theta: &[T], rng: &mut dyn RngCore) -> T {
        let p = self.map_params(theta);
        let z: f64 = rng.sample(StandardNormal);
        p.phi * *prev + p.sigma_v * T::of(z)
    }

    fn observation_log_density(&self, y: T, x: &T, theta: &[T]) -> T {
        let p = self.map_params(theta);
        let e = (y - *x) / p.sigma_w;
        -T::of(0.5) * (T::of(std::f64::consts::TAU.ln()) + e * e) - p.sigma_w.ln()
    }

    fn sample_observation(&self, x: &T, theta: &[T], rng: &mut dyn RngCore) -> T {
        let p = self.map_params(theta);
        let z: f64 = rng.sample(StandardNormal);
        *x + p.sigma_w * T::of(z)
    }
}

/// Raised when the extrapolation discrepancy exceeds
/// [`ORACLE_ACCURACY_THRESHOLD`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleAccuracyWarning {
    pub max_error: f64,
}

/// Exact-likelihood score and observed information.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanOracle<T> {
    pub loglik: T,
    pub score: ScoreVector<T>,
    pub oim: InfoMatrix<T>,
    pub score_error: Vec<T>,
    pub oim_error: Matrix<T>,
    pub warning: Option<OracleAccuracyWarning>,
}

/// Default step for [`kalman_score_oim_oracle`].
pub const ORACLE_STEP: f64 = 1e-3;

/// Richardson-extrapolated derivatives of the exact Kalman log-likelihood.
pub fn kalman_score_oim_oracle<T: Real>(
    model: &Lgssm<T>,
    theta: &[T],
    obs: &ObservationSequence<T>,
) -> Result<KalmanOracle<T>> {
    let h = T::of(ORACLE_STEP);
    let loglik = model.kalman_loglik(theta, obs)?;
    let est = richardson_derivatives(|t| model.kalman_loglik(t, obs), theta, h)?;
    let max_error = est.max_error().to_f64_lossy();
    let warning = (max_error > ORACLE_ACCURACY_THRESHOLD).then_some(OracleAccuracyWarning { max_error });
    let meta = EstimateMeta::new(Method::Oracle, 0).with_h(h);
    Ok(KalmanOracle {
        loglik,
        score: ScoreVector { values: est.gradient, meta },
        oim: InfoMatrix::new(est.hessian.scale(-T::one()), meta),
        score_error: est.gradient_error,
        oim_error: est.hessian_error,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_observation_log_density() {
        // x_1 ~ N(0, 1), y_1 = x_1 + N(0, 1), y_1 = 0 -> log N(0; 0, 2)
        let m = Lgssm::new(
            LgssmParams { phi: 0.5, sigma_v: 1.0f64, sigma_w: 1.0 },
            vec![LgssmCoord::Phi],
            InitialLaw::Fixed { mean: 0.0, variance: 1.0 },
        )
        .unwrap();
        let obs = ObservationSequence::new(vec![0.0]).unwrap();
        let ll = m.kalman_loglik(&[0.5], &obs).unwrap();
        let expect = -0.5 * (4.0 * std::f64::consts::PI).ln();
        assert!((ll - expect).abs() < 1e-14);
        assert!((ll + 1.265512).abs() < 1e-6);
    }

    #[test]
    fn theta_round_trip_and_clamp() {
        let m = Lgssm::standard(LgssmParams { phi: 0.8f64, sigma_v: 1.5, sigma_w: 0.3 });
        let theta = m.theta_of(&m.base());
        let p = m.params(&theta).unwrap();
        assert!((p.sigma_v - 1.5).abs() < 1e-14 && (p.sigma_w - 0.3).abs() < 1e-15);
        assert_eq!(m.map_params(&[1.7, 0.0, 0.0]).phi, PHI_BOUND);
    }

    #[test]
    fn invalid_parameters() {
        let base = LgssmParams { phi: 0.5f64, sigma_v: 1.0, sigma_w: 1.0 };
        assert!(Lgssm::new(base, vec![], InitialLaw::Stationary).is_err());
        assert!(Lgssm::new(base, vec![LgssmCoord::Phi, LgssmCoord::Phi], InitialLaw::Stationary).is_err());
        assert!(Lgssm::new(LgssmParams { phi: 1.0, ..base }, vec![LgssmCoord::Phi], InitialLaw::Stationary).is_err());
        let m = Lgssm::standard(base);
        let obs = ObservationSequence::new(vec![0.0]).unwrap();
        assert!(matches!(m.kalman_loglik(&[0.5, 800.0, 0.0], &obs), Err(Error::InvalidParameter(_))));
        assert!(matches!(m.kalman_loglik(&[0.5, 0.0], &obs), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn oracle_is_symmetric_without_warning() {
        let m = Lgssm::standard(LgssmParams { phi: 0.7f64, sigma_v: 1.0, sigma_w: 0.5 });
        let obs = ObservationSequence::new(vec![0.3, -0.2, 1.1, 0.8, 0.1, -0.9]).unwrap();
        let theta = m.theta_of(&m.base());
        let o = kalman_score_oim_oracle(&m, &theta, &obs).unwrap();
        assert!(o.oim.values().is_symmetric());
        assert!(o.warning.is_none(), "{:?}", o.warning);
        assert_eq!(o.score.values.len(), 3);
    }
}
