//! Scalar abstraction shared by every estimator.
//!
//! All numerical code is written against [`Real`] so that the same
//! estimators can run in `f32` (cheap sweeps) or `f64` (oracles and
//! acceptance checks).

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar used throughout the crate.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal or intermediate.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Real type")
    }

    /// Conversion from a count.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable in every Real type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `log(sum(exp(xs)))` with a max shift. Returns `-inf` for an empty or
/// all `-inf` slice.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let m = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return m;
    }
    let s: T = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}
