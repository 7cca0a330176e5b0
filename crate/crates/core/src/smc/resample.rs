use rand::{Rng, RngCore};
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResamplingScheme {
    /// i.i.d. categorical draws.
    #[default]
    Multinomial,
    /// One uniform, stratified inversion. Lower variance, but the
    /// particle error bounds are stated for the multinomial filter.
    Systematic,
}

impl ResamplingScheme {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "multinomial" => Some(Self::Multinomial),
            "systematic" => Some(Self::Systematic),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Multinomial => "multinomial",
            Self::Systematic => "systematic",
        }
    }
}

/// Draws `weights.len()` ancestor indices into `out`.
///
/// Weights need not be normalized but must be non-negative with a positive
/// finite sum. Ancestors come out in non-decreasing order.
pub fn resample<T, R>(weights: &[T], scheme: ResamplingScheme, rng: &mut R, out: &mut Vec<usize>) -> Result<()>
where
    T: Real,
    R: RngCore + ?Sized,
{
    let n = weights.len();
    let mut total = 0.0f64;
    for &w in weights {
        let w = w.to_f64_lossy();
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::InvalidWeights);
        }
        total += w;
    }
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::InvalidWeights);
    }
    out.clear();
    out.reserve(n);

    // Sorted points in [0, total).
    let mut positions = Vec::with_capacity(n);
    match scheme {
        ResamplingScheme::Multinomial => {
            // Normalized partial sums of n + 1 exponentials are the order
            // statistics of n i.i.d. uniforms.
            let mut acc = 0.0f64;
            for _ in 0..n {
                let e: f64 = rng.sample(Exp1);
                acc += e;
                positions.push(acc);
            }
            let e: f64 = rng.sample(Exp1);
            let scale = total / (acc + e);
            for p in positions.iter_mut() {
                *p *= scale;
            }
        }
        ResamplingScheme::Systematic => {
            let u: f64 = rng.random();
            let step = total / n as f64;
            positions.extend((0..n).map(|k| (k as f64 + u) * step));
        }
    }

    let mut idx = 0usize;
    let mut cum = weights[0].to_f64_lossy();
    for p in positions {
        while p >= cum && idx + 1 < n {
            idx += 1;
            cum += weights[idx].to_f64_lossy();
        }
        // Never select a zero-weight index via round-off at the tail.
        while weights[idx] == T::zero() && idx > 0 {
            idx -= 1;
        }
        out.push(idx);
    }
    Ok(())
}
