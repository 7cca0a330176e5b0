//! State-space models with sample-only latent dynamics.

mod lgssm;
mod mixture;
mod richardson;

pub use lgssm::{
    kalman_score_oim_oracle, InitialLaw, KalmanOracle, Lgssm, LgssmCoord, LgssmParams, OracleAccuracyWarning,
    ORACLE_ACCURACY_THRESHOLD, ORACLE_STEP, PHI_BOUND,
};
pub use mixture::ScaleMixtureAr;
pub use richardson::{richardson_derivatives, DerivativeEstimate};

use std::io::{BufRead, Write};

use rand::RngCore;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A latent Markov model observed through a pointwise-evaluable density.
///
/// The latent dynamics can only be *simulated*: there is deliberately no
/// way to ask for the initial or transition density. Scalar observations.
pub trait StateSpaceModel<T: Real>: Sync {
    type State: Clone + Send + Sync;

    fn param_dim(&self) -> usize;

    /// Draw `x_1 ~ nu(.; theta)`.
    fn sample_initial(&self, theta: &[T], rng: &mut dyn RngCore) -> Self::State;

    /// Draw `x_t ~ f(. | prev; theta)`.
    fn sample_transition(&self, prev: &Self::State, theta: &[T], rng: &mut dyn RngCore) -> Self::State;

    /// `log g(y | x; theta)`, finite or `-inf`.
    fn observation_log_density(&self, y: T, x: &Self::State, theta: &[T]) -> T;

    /// Draw `y ~ g(. | x; theta)`; only used to simulate data.
    fn sample_observation(&self, x: &Self::State, theta: &[T], rng: &mut dyn RngCore) -> T;
}

/// Observations `y_1, ..., y_T` with `T >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSequence<T> {
    values: Vec<T>,
}

impl<T: Real> ObservationSequence<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyObservations);
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `t,y` header then one row per step, `t` starting at 1.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,y")?;
        for (t, y) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", t + 1, y)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "t,y" => {}
            _ => return Err(Error::Csv { line: 1, message: "expected header `t,y`".into() }),
        }
        let mut values = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line?;
            let lineno = k + 2;
            if line.trim().is_empty() {
                continue;
            }
            let (t, y) = line
                .split_once(',')
                .ok_or_else(|| Error::Csv { line: lineno, message: "expected two columns".into() })?;
            let t: usize = t.trim().parse().map_err(|_| Error::Csv { line: lineno, message: "bad t".into() })?;
            if t != values.len() + 1 {
                return Err(Error::Csv { line: lineno, message: format!("expected t = {}", values.len() + 1) });
            }
            let y: T = y.trim().parse().map_err(|_| Error::Csv { line: lineno, message: "bad y".into() })?;
            values.push(y);
        }
        Self::new(values)
    }
}

/// Forward simulation of `(x_{1:T}, y_{1:T})` under `theta`.
pub fn simulate<T, M>(
    model: &M,
    theta: &[T],
    horizon: usize,
    rng: &mut dyn RngCore,
) -> Result<(Vec<M::State>, ObservationSequence<T>)>
where
    T: Real,
    M: StateSpaceModel<T> + ?Sized,
{
    if horizon == 0 {
        return Err(Error::EmptyObservations);
    }
    if theta.len() != model.param_dim() {
        return Err(Error::DimensionMismatch { expected: model.param_dim(), found: theta.len() });
    }
    let mut states = Vec::with_capacity(horizon);
    let mut ys = Vec::with_capacity(horizon);
    let mut x = model.sample_initial(theta, rng);
    for t in 0..horizon {
        if t > 0 {
            x = model.sample_transition(&x, theta, rng);
        }
        ys.push(model.sample_observation(&x, theta, rng));
        states.push(x.clone());
    }
    Ok((states, ObservationSequence::new(ys)?))
}
