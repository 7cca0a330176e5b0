use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// First and second derivatives of a noise-free function with per-entry
/// error estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeEstimate<T> {
    pub gradient: Vec<T>,
    pub hessian: Matrix<T>,
    /// `|D(h/2) - D(h)| / 3` per gradient entry.
    pub gradient_error: Vec<T>,
    pub hessian_error: Matrix<T>,
}

impl<T: Real> DerivativeEstimate<T> {
    pub fn max_error(&self) -> T {
        self.gradient_error
            .iter()
            .chain(self.hessian_error.as_slice())
            .copied()
            .fold(T::zero(), T::max)
    }
}

/// Central differences at steps `h` and `h/2` combined as
/// `(4 D(h/2) - D(h)) / 3`, cancelling the `h^2` error term.
pub fn richardson_derivatives<T, F>(f: F, theta: &[T], h: T) -> Result<DerivativeEstimate<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<T>,
{
    if !(h > T::zero()) {
        return Err(Error::InvalidParameter("Richardson step must be positive".into()));
    }
    let d = theta.len();
    let mut point = theta.to_vec();
    let mut eval = |moves: &[(usize, T)]| -> Result<T> {
        point.copy_from_slice(theta);
        for &(i, delta) in moves {
            point[i] += delta;
        }
        let v = f(&point)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteEvaluation { context: format!("derivative oracle at {point:?}") })
        }
    };

    let two = T::of(2.0);
    let three = T::of(3.0);
    let four = T::of(4.0);
    let combine = |coarse: T, fine: T| ((four * fine - coarse) / three, ((fine - coarse) / three).abs());

    let f0 = eval(&[])?;
    let mut gradient = vec![T::zero(); d];
    let mut gradient_error = vec![T::zero(); d];
    let mut hessian = Matrix::zeros(d);
    let mut hessian_error = Matrix::zeros(d);

    for r in 0..d {
        let mut first = [T::zero(); 2];
        let mut second = [T::zero(); 2];
        for (k, step) in [h, h / two].into_iter().enumerate() {
            let p = eval(&[(r, step)])?;
            let m = eval(&[(r, -step)])?;
            first[k] = (p - m) / (two * step);
            second[k] = (p - two * f0 + m) / (step * step);
        }
        (gradient[r], gradient_error[r]) = combine(first[0], first[1]);
        (hessian[(r, r)], hessian_error[(r, r)]) = combine(second[0], second[1]);
    }
    for r in 0..d {
        for s in (r + 1)..d {
            let mut cross = [T::zero(); 2];
            for (k, step) in [h, h / two].into_iter().enumerate() {
                let pp = eval(&[(r, step), (s, step)])?;
                let pm = eval(&[(r, step), (s, -step)])?;
                let mp = eval(&[(r, -step), (s, step)])?;
                let mm = eval(&[(r, -step), (s, -step)])?;
                cross[k] = (pp - pm - mp + mm) / (four * step * step);
            }
            let (v, e) = combine(cross[0], cross[1]);
            hessian[(r, s)] = v;
            hessian[(s, r)] = v;
            hessian_error[(r, s)] = e;
            hessian_error[(s, r)] = e;
        }
    }
    Ok(DerivativeEstimate { gradient, hessian, gradient_error, hessian_error })
}
