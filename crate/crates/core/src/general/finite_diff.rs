use super::LogLikelihood;
use crate::error::{Error, Result};
use crate::estimate::{EstimateMeta, InfoMatrix, Method, ScoreVector};
use crate::linalg::Matrix;
use crate::rng::child_stream;
use crate::scalar::Real;

/// Central finite-difference settings.
///
/// Evaluation `k` of one call draws from the stream derived from
/// `(seed, k)`, so every likelihood estimate is independent of the others.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig<T> {
    pub h: T,
    pub seed: u64,
}

impl<T: Real> FdConfig<T> {
    pub fn new(h: T, seed: u64) -> Result<Self> {
        if h > T::zero() && h.is_finite() {
            Ok(Self { h, seed })
        } else {
            Err(Error::InvalidParameter(format!("finite-difference step must be positive, got {h}")))
        }
    }
}

struct Evaluator<'a, T, L: ?Sized> {
    model: &'a L,
    seed: u64,
    next: u64,
    point: Vec<T>,
}

impl<'a, T: Real, L: LogLikelihood<T> + ?Sized> Evaluator<'a, T, L> {
    fn new(model: &'a L, seed: u64, theta: &[T]) -> Self {
        Self { model, seed, next: 0, point: theta.to_vec() }
    }

    /// `l(theta + sum_k c_k h e_{i_k})` on a fresh stream.
    fn at(&mut self, theta: &[T], moves: &[(usize, T)]) -> Result<T> {
        self.point.copy_from_slice(theta);
        for &(i, delta) in moves {
            self.point[i] += delta;
        }
        let mut rng = child_stream(self.seed, &[self.next]);
        self.next += 1;
        let v = self.model.log_likelihood(&self.point, &mut rng);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteEvaluation { context: format!("finite difference at {:?}", self.point) })
        }
    }
}

fn check<T: Real, L: LogLikelihood<T> + ?Sized>(model: &L, theta: &[T]) -> Result<()> {
    if model.dim() != theta.len() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: theta.len() });
    }
    Ok(())
}

/// Central difference `(l(theta + h e_r) - l(theta - h e_r)) / 2h` per coordinate.
pub fn fd_score<T, L>(model: &L, theta: &[T], cfg: &FdConfig<T>) -> Result<ScoreVector<T>>
where
    T: Real,
    L: LogLikelihood<T> + ?Sized,
{
    check(model, theta)?;
    let h = cfg.h;
    let mut ev = Evaluator::new(model, cfg.seed, theta);
    let mut values = Vec::with_capacity(theta.len());
    for r in 0..theta.len() {
        let plus = ev.at(theta, &[(r, h)])?;
        let minus = ev.at(theta, &[(r, -h)])?;
        values.push((plus - minus) / (T::of(2.0) * h));
    }
    let meta = EstimateMeta::new(Method::FiniteDifference, ev.next as usize).with_h(h);
    Ok(ScoreVector { values, meta })
}

/// Negative second central difference on the diagonal, negative 4-point
/// cross stencil off the diagonal.
pub fn fd_oim<T, L>(model: &L, theta: &[T], cfg: &FdConfig<T>) -> Result<InfoMatrix<T>>
where
    T: Real,
    L: LogLikelihood<T> + ?Sized,
{
    check(model, theta)?;
    let d = theta.len();
    let h = cfg.h;
    let mut ev = Evaluator::new(model, cfg.seed, theta);
    let center = ev.at(theta, &[])?;
    let mut hess = Matrix::zeros(d);
    for r in 0..d {
        let plus = ev.at(theta, &[(r, h)])?;
        let minus = ev.at(theta, &[(r, -h)])?;
        hess[(r, r)] = (plus - T::of(2.0) * center + minus) / (h * h);
    }
    for r in 0..d {
        for s in (r + 1)..d {
            let pp = ev.at(theta, &[(r, h), (s, h)])?;
            let pm = ev.at(theta, &[(r, h), (s, -h)])?;
            let mp = ev.at(theta, &[(r, -h), (s, h)])?;
            let mm = ev.at(theta, &[(r, -h), (s, -h)])?;
            let v = (pp - pm - mp + mm) / (T::of(4.0) * h * h);
            hess[(r, s)] = v;
            hess[(s, r)] = v;
        }
    }
    let meta = EstimateMeta::new(Method::FiniteDifference, ev.next as usize).with_h(h);
    Ok(InfoMatrix::new(hess.scale(-T::one()), meta))
}

/// Number of likelihood evaluations used by [`fd_score`] / [`fd_oim`] in dimension `d`.
pub fn fd_evaluations(d: usize, oim: bool) -> usize {
    if oim {
        1 + 2 * d + 2 * d * (d.saturating_sub(1))
    } else {
        2 * d
    }
}
