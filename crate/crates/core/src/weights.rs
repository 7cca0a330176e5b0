//! Self-normalized weights from log-weights.

use crate::scalar::Real;

/// Outcome of normalizing a vector of log-weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalized<T> {
    /// `log sum exp(log_weights)`.
    Ok { log_sum: T },
    /// Every log-weight was `-inf`.
    AllZero,
    /// A log-weight was NaN or `+inf`.
    NonFinite,
}

/// Writes `w_i = exp(lw_i - max) / sum_j exp(lw_j - max)` into `out`.
///
/// Equal log-weights give exactly `1/n` in every slot.
pub fn normalize_log_weights<T: Real>(log_weights: &[T], out: &mut [T]) -> Normalized<T> {
    debug_assert_eq!(log_weights.len(), out.len());
    let mut max = T::neg_infinity();
    for &lw in log_weights {
        if lw.is_nan() || lw == T::infinity() {
            return Normalized::NonFinite;
        }
        if lw > max {
            max = lw;
        }
    }
    if max == T::neg_infinity() {
        return Normalized::AllZero;
    }
    let mut sum = T::zero();
    for (o, &lw) in out.iter_mut().zip(log_weights) {
        let w = (lw - max).exp();
        *o = w;
        sum += w;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
    Normalized::Ok { log_sum: max + sum.ln() }
}

/// `1 / sum w_i^2` for normalized weights.
pub fn effective_sample_size<T: Real>(weights: &[T]) -> T {
    T::one() / weights.iter().map(|&w| w * w).sum::<T>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equal_log_weights_are_exactly_uniform() {
        for n in [1usize, 3, 7, 1000] {
            let lw = vec![-12.345f64; n];
            let mut w = vec![0.0; n];
            normalize_log_weights(&lw, &mut w);
            let expect = 1.0 / n as f64;
            assert!(w.iter().all(|&x| x == expect));
        }
    }

    #[test]
    fn degenerate_inputs() {
        let mut w = [0.0f64; 2];
        assert_eq!(normalize_log_weights(&[f64::NEG_INFINITY; 2], &mut w), Normalized::AllZero);
        assert_eq!(normalize_log_weights(&[0.0, f64::NAN], &mut w), Normalized::NonFinite);
    }

    proptest! {
        #[test]
        fn weights_sum_to_one(lw in proptest::collection::vec(-700.0f64..700.0, 1..200)) {
            let mut w = vec![0.0; lw.len()];
            let r = normalize_log_weights(&lw, &mut w);
            prop_assert!(matches!(r, Normalized::Ok { .. }), "not ok");
            let s: f64 = w.iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            let ess = effective_sample_size(&w);
            prop_assert!(ess >= 1.0 - 1e-9 && ess <= lw.len() as f64 + 1e-9);
        }
    }
}
