use std::collections::VecDeque;

use rand::RngCore;

use super::accumulator::{CrossCovariance, FixedLagAccumulator};
use super::resample::{resample, ResamplingScheme};
use crate::error::{Error, Result};
use crate::general::{weighted_mean, weighted_mean_cov};
use crate::kernel::PerturbationKernel;
use crate::linalg::Matrix;
use crate::rng::stream;
use crate::scalar::{log_sum_exp, Real};
use crate::ssm::{ObservationSequence, StateSpaceModel};
use crate::weights::{effective_sample_size, normalize_log_weights, Normalized};

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedFilterConfig<T> {
    /// Center `theta`, replicated at every time step.
    pub theta: Vec<T>,
    /// Perturbation scale; `0` runs the plain bootstrap filter at `theta`.
    pub tau: T,
    pub kernel: PerturbationKernel<T>,
    /// Fixed lag; anything `>= T - 1` means full smoothing.
    pub lag: usize,
    pub n_particles: usize,
    pub resampling: ResamplingScheme,
    /// Resample only when `ESS < fraction * N`. `None` (default) resamples
    /// at every step.
    pub ess_fraction: Option<T>,
    pub seed: u64,
}

impl<T: Real> ExtendedFilterConfig<T> {
    pub fn new(theta: Vec<T>, tau: T, kernel: PerturbationKernel<T>, lag: usize, n_particles: usize, seed: u64) -> Self {
        Self {
            theta,
            tau,
            kernel,
            lag,
            n_particles,
            resampling: ResamplingScheme::Multinomial,
            ess_fraction: None,
            seed,
        }
    }

    fn validate(&self, param_dim: usize) -> Result<()> {
        if self.n_particles < 2 {
            return Err(Error::InvalidFilterConfig(format!("need N >= 2 particles, got {}", self.n_particles)));
        }
        if !(self.tau >= T::zero()) || !self.tau.is_finite() {
            return Err(Error::InvalidScale(self.tau.to_f64_lossy()));
        }
        self.kernel.check_dim(self.theta.len())?;
        self.kernel.check_dim(param_dim)?;
        if let Some(f) = self.ess_fraction {
            if !(f > T::zero() && f <= T::one()) {
                return Err(Error::InvalidFilterConfig("ess_fraction must lie in (0, 1]".into()));
            }
        }
        Ok(())
    }
}

/// What an observer sees after the weighting step at `step`.
#[derive(Debug)]
pub struct StepView<'a, T> {
    pub step: usize,
    /// Normalized weights.
    pub weights: &'a [T],
    pub ess: T,
}

/// Runs the extended bootstrap filter with a stream seeded from `cfg.seed`.
pub fn run_extended_bootstrap<T, M>(
    model: &M,
    obs: &ObservationSequence<T>,
    cfg: &ExtendedFilterConfig<T>,
) -> Result<FixedLagAccumulator<T>>
where
    T: Real,
    M: StateSpaceModel<T> + ?Sized,
{
    let mut rng = stream(cfg.seed);
    run_extended_bootstrap_with(model, obs, cfg, &mut rng, |_| {})
}

/// Sliding window of per-step perturbed parameters, each slot `N x d`
/// row-major and aligned with the current particles.
struct History<T> {
    slots: VecDeque<Vec<T>>,
    /// Time index of `slots[0]`.
    first: usize,
    capacity: usize,
    spare: Vec<Vec<T>>,
}

impl<T: Real> History<T> {
    fn slot(&self, t: usize) -> &[T] {
        assert!(t >= self.first && t - self.first < self.slots.len(), "history window underflow at t = {t}");
        &self.slots[t - self.first]
    }

    fn fresh(&mut self, len: usize) -> Vec<T> {
        self.spare.pop().unwrap_or_else(|| vec![T::zero(); len])
    }

    fn push(&mut self, slot: Vec<T>) {
        self.slots.push_back(slot);
        if self.slots.len() > self.capacity {
            let old = self.slots.pop_front().expect("non-empty");
            self.spare.push(old);
            self.first += 1;
        }
    }

    fn gather(&mut self, ancestors: &[usize], d: usize) {
        for slot in self.slots.iter_mut() {
            let mut next = self.spare.pop().unwrap_or_else(|| vec![T::zero(); slot.len()]);
            for (dst, &a) in next.chunks_exact_mut(d).zip(ancestors) {
                dst.copy_from_slice(&slot[a * d..(a + 1) * d]);
            }
            std::mem::swap(slot, &mut next);
            self.spare.push(next);
        }
    }
}

/// Runs the extended bootstrap filter on a caller-supplied stream and
/// reports every weighting step to `observer`.
///
/// At each step every particle draws a fresh `theta~_t` from the kernel
/// centered at `theta`, moves its state with the sample-only transition
/// under `theta~_t` and is weighted by `g(y_t | x_t; theta~_t)`. Moments of
/// `theta~_{u - lag}` and its cross-covariances with the previous `lag`
/// steps are read with the weights at step `u`, before resampling. The
/// random stream consumption does not depend on `lag`.
pub fn run_extended_bootstrap_with<T, M, R, O>(
    model: &M,
    obs: &ObservationSequence<T>,
    cfg: &ExtendedFilterConfig<T>,
    rng: &mut R,
    mut observer: O,
) -> Result<FixedLagAccumulator<T>>
where
    T: Real,
    M: StateSpaceModel<T> + ?Sized,
    R: RngCore,
    O: FnMut(StepView<'_, T>),
{
    cfg.validate(model.param_dim())?;
    let n = cfg.n_particles;
    let d = cfg.kernel.dim();
    let horizon = obs.len();
    let mut acc = FixedLagAccumulator::new(d, horizon, cfg.lag);
    let lag = acc.lag();

    let mut history = History { slots: VecDeque::new(), first: 1, capacity: 2 * lag + 1, spare: Vec::new() };
    let mut states: Vec<M::State> = Vec::with_capacity(n);
    let mut scratch: Vec<M::State> = Vec::with_capacity(n);
    let mut log_w = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let mut ancestors = Vec::with_capacity(n);
    let ln_n = T::of_usize(n).ln();
    let mut prev_log_sum = ln_n;

    for (u, &y) in (1..=horizon).zip(obs.values()) {
        let mut slot = history.fresh(n * d);
        for i in 0..n {
            let theta_i = &mut slot[i * d..(i + 1) * d];
            cfg.kernel.sample_into(&cfg.theta, cfg.tau, rng, theta_i)?;
            if u == 1 {
                states.push(model.sample_initial(theta_i, rng));
            } else {
                states[i] = model.sample_transition(&states[i], theta_i, rng);
            }
            log_w[i] += model.observation_log_density(y, &states[i], theta_i);
        }
        history.push(slot);

        let log_sum = match normalize_log_weights(&log_w, &mut w) {
            Normalized::Ok { log_sum } => log_sum,
            Normalized::AllZero => return Err(Error::ParticleCollapse { step: u }),
            Normalized::NonFinite => {
                return Err(Error::NonFiniteEvaluation { context: format!("observation log-density at step {u}") })
            }
        };
        acc.add_loglik(log_sum - prev_log_sum);
        let ess = effective_sample_size(&w);
        acc.push_ess(ess);
        observer(StepView { step: u, weights: &w, ess });

        if u > lag {
            read_off(&mut acc, &history, &w, d, u - lag, u);
        }
        if u == horizon {
            for t in (horizon + 1 - lag).max(1)..=horizon {
                read_off(&mut acc, &history, &w, d, t, horizon);
            }
            break;
        }

        let do_resample = match cfg.ess_fraction {
            None => true,
            Some(f) => ess < f * T::of_usize(n),
        };
        if do_resample {
            resample(&w, cfg.resampling, rng, &mut ancestors)?;
            scratch.clear();
            scratch.extend(ancestors.iter().map(|&a| states[a].clone()));
            std::mem::swap(&mut states, &mut scratch);
            history.gather(&ancestors, d);
            log_w.iter_mut().for_each(|v| *v = T::zero());
            prev_log_sum = ln_n;
        } else {
            prev_log_sum = log_sum_exp(&log_w);
        }
    }
    Ok(acc)
}

fn read_off<T: Real>(acc: &mut FixedLagAccumulator<T>, history: &History<T>, w: &[T], d: usize, t: usize, horizon: usize) {
    let current = history.slot(t);
    let (mean_t, var_t) = weighted_mean_cov(current, d, w);
    let first_pair = t.saturating_sub(acc.lag()).max(1);
    for s in first_pair..t {
        let earlier = history.slot(s);
        let mean_s = weighted_mean(earlier, d, w);
        let mut c = Matrix::zeros(d);
        for ((ps, pt), &wi) in earlier.chunks_exact(d).zip(current.chunks_exact(d)).zip(w) {
            for a in 0..d {
                let da = wi * (ps[a] - mean_s[a]);
                for b in 0..d {
                    c[(a, b)] += da * (pt[b] - mean_t[b]);
                }
            }
        }
        acc.push_cross(CrossCovariance { s, t, horizon, matrix: c });
    }
    acc.set_moments(t, horizon, mean_t, var_t);
}
