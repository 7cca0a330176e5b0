use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::StateSpaceModel;
use crate::scalar::Real;

/// AR(1) latent process driven by a Gaussian scale mixture:
///
/// ```text
/// x_t = phi x_{t-1} + sigma_v * e_t * exp(n_t / 2),   e_t, n_t ~ N(0, 1)
/// y_t = x_t + sigma_w w_t
/// ```
///
/// The innovation law has no closed-form density, so only the bootstrap
/// filter can be used on it. `theta = (phi, log sigma_v, log sigma_w)`,
/// with `phi` clamped to `[-0.999, 0.999]`. The initial state is drawn by
/// running the transition from `0` for a short burn-in.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScaleMixtureAr {
    pub burn_in: usize,
}

impl ScaleMixtureAr {
    pub fn new(burn_in: usize) -> Self {
        Self { burn_in }
    }

    fn unpack<T: Real>(theta: &[T]) -> (T, T, T) {
        let bound = T::of(super::PHI_BOUND);
        (theta[0].max(-bound).min(bound), theta[1].exp(), theta[2].exp())
    }

    fn step<T: Real>(x: T, theta: &[T], rng: &mut dyn RngCore) -> T {
        let (phi, sigma_v, _) = Self::unpack(theta);
        let e: f64 = rng.sample(StandardNormal);
        let n: f64 = rng.sample(StandardNormal);
        phi * x + sigma_v * T::of(e * (0.5 * n).exp())
    }
}

impl<T: Real> StateSpaceModel<T> for ScaleMixtureAr {
    type State = T;

    fn param_dim(&self) -> usize {
        3
    }

    fn sample_initial(&self, theta: &[T], rng: &mut dyn RngCore) -> T {
        let mut x = T::zero();
        for _ in 0..=self.burn_in {
            x = Self::step(x, theta, rng);
        }
        x
    }

    fn sample_transition(&self, prev: &T, theta: &[T], rng: &mut dyn RngCore) -> T {
        Self::step(*prev, theta, rng)
    }

    fn observation_log_density(&self, y: T, x: &T, theta: &[T]) -> T {
        let (_, _, sigma_w) = Self::unpack(theta);
        let e = (y - *x) / sigma_w;
        -T::of(0.5) * (T::of(std::f64::consts::TAU.ln()) + e * e) - sigma_w.ln()
    }

    fn sample_observation(&self, x: &T, theta: &[T], rng: &mut dyn RngCore) -> T {
        let (_, _, sigma_w) = Self::unpack(theta);
        let z: f64 = rng.sample(StandardNormal);
        *x + sigma_w * T::of(z)
    }
}
