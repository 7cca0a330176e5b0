//! Experiment execution.
//!
//! Seed splitting: replication `r` at grid point `g` runs on the stream
//! seeded by `derive_seed(base, [g, r])` (see [`crate::rng`]), and gets
//! `run_id = g * R + r`. Results are sorted by run id before output, so the
//! worker pool size never changes the CSV.

use std::fs::File;
use std::io::BufReader;
use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;

use super::config::{DataSource, EstimatorKind, Experiment, FdLoglik, LgssmInit, ModelSpec};
use super::records::{sort_records, RunRecord};
use crate::error::{Error, Result};
use crate::general::{
    fd_evaluations, fd_oim, fd_score, oim_general, posterior_moments_is, posterior_moments_quadrature,
    score_general, ExactDerivatives, FdConfig, GaussianLikelihood, GridSpec, LogLikelihood, NegQuartic,
    PoissonLikelihood, PosteriorMoments,
};
use crate::kernel::{PerturbationKernel, Tau};
use crate::linalg::Matrix;
use crate::rng::{derive_seed, stream};
use crate::smc::{oim_ssm, run_extended_bootstrap, run_extended_bootstrap_with, score_ssm, ExtendedFilterConfig, ResamplingScheme};
use crate::ssm::{
    kalman_score_oim_oracle, simulate, InitialLaw, Lgssm, LgssmParams, ObservationSequence, ScaleMixtureAr,
    StateSpaceModel,
};

/// One point of a sweep. `index` feeds the seed derivation and run ids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub tau: f64,
    pub n: usize,
    pub lag: usize,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    /// First entry of every grid.
    Single,
    /// Every `tau` (every `h` for finite differences).
    Tau,
    /// Every `n`; `tau` and `h` follow their power rules when set.
    N,
    /// Every lag.
    Lag,
}

pub fn grid_points(exp: &Experiment, sweep: Sweep) -> Vec<GridPoint> {
    let g = &exp.grid;
    let tau_at = |n: usize, fixed: f64| g.tau_exponent.map_or(fixed, |e| g.tau_scale * (n as f64).powf(e));
    let h_at = |n: usize, fixed: f64| g.h_exponent.map_or(fixed, |e| g.h_scale * (n as f64).powf(e));
    let base = |index: usize, n: usize| GridPoint { index, tau: tau_at(n, g.tau[0]), n, lag: g.lag[0], h: h_at(n, g.h[0]) };
    match sweep {
        Sweep::Single => vec![base(0, g.n[0])],
        Sweep::N => g.n.iter().enumerate().map(|(k, &n)| base(k, n)).collect(),
        Sweep::Lag => g.lag.iter().enumerate().map(|(k, &lag)| GridPoint { lag, ..base(k, g.n[0]) }).collect(),
        Sweep::Tau if exp.method.is_fd() => {
            g.h.iter().enumerate().map(|(k, &h)| GridPoint { h, ..base(k, g.n[0]) }).collect()
        }
        Sweep::Tau => g.tau.iter().enumerate().map(|(k, &tau)| GridPoint { tau, ..base(k, g.n[0]) }).collect(),
    }
}

enum PreparedModel {
    Gaussian(GaussianLikelihood<f64>),
    Poisson(PoissonLikelihood<f64>),
    Quartic(NegQuartic),
    Lgssm { model: Lgssm<f64>, obs: ObservationSequence<f64> },
    Mixture { model: ScaleMixtureAr, obs: ObservationSequence<f64> },
}

/// Ground-truth derivatives at the evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct Oracle {
    pub score: Vec<f64>,
    pub oim: Matrix<f64>,
    /// Set when the extrapolation error of a numerical oracle exceeds its
    /// accuracy threshold.
    pub accuracy_warning: Option<f64>,
}

/// Model, data, evaluation point and oracle, built once per experiment.
pub struct Prepared {
    model: PreparedModel,
    pub theta: Vec<f64>,
    pub kernel: PerturbationKernel<f64>,
    pub oracle: Option<Oracle>,
}

impl Prepared {
    pub fn horizon(&self) -> Option<usize> {
        match &self.model {
            PreparedModel::Lgssm { obs, .. } | PreparedModel::Mixture { obs, .. } => Some(obs.len()),
            _ => None,
        }
    }

    pub fn observations(&self) -> Option<&ObservationSequence<f64>> {
        match &self.model {
            PreparedModel::Lgssm { obs, .. } | PreparedModel::Mixture { obs, .. } => Some(obs),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }
}

fn load_data<M: StateSpaceModel<f64>>(model: &M, truth: &[f64], data: &DataSource) -> Result<ObservationSequence<f64>> {
    match data {
        DataSource::Simulated { horizon, seed } => Ok(simulate(model, truth, *horizon, &mut stream(*seed))?.1),
        DataSource::File(path) => {
            let f = File::open(path).map_err(|e| Error::Config { key: "model.data".into(), message: format!("{}: {e}", path.display()) })?;
            ObservationSequence::read_csv(BufReader::new(f))
        }
    }
}

fn exact_oracle<M: ExactDerivatives<f64>>(m: &M, theta: &[f64]) -> Oracle {
    Oracle { score: m.score(theta), oim: m.observed_information(theta), accuracy_warning: None }
}

pub fn prepare(exp: &Experiment) -> Result<Prepared> {
    let kernel = PerturbationKernel::gaussian(exp.kernel_sigmas.clone())?;
    let given = exp.theta.clone();
    let (model, theta, oracle) = match &exp.model {
        ModelSpec::Gaussian { observations, scales } => {
            let m = GaussianLikelihood::new(observations.clone(), scales.clone())?;
            let theta = given.expect("validated");
            let o = exact_oracle(&m, &theta);
            (PreparedModel::Gaussian(m), theta, Some(o))
        }
        ModelSpec::Poisson { count } => {
            let m = PoissonLikelihood { count: *count };
            let theta = given.expect("validated");
            let o = exact_oracle(&m, &theta);
            (PreparedModel::Poisson(m), theta, Some(o))
        }
        ModelSpec::Quartic { dim } => {
            let m = NegQuartic { dim: *dim };
            let theta = given.expect("validated");
            let o = exact_oracle(&m, &theta);
            (PreparedModel::Quartic(m), theta, Some(o))
        }
        ModelSpec::Lgssm { phi, sigma_v, sigma_w, free, init, data } => {
            let init = match *init {
                LgssmInit::Stationary => InitialLaw::Stationary,
                LgssmInit::Fixed { mean, variance } => InitialLaw::Fixed { mean, variance },
            };
            let params = LgssmParams { phi: *phi, sigma_v: *sigma_v, sigma_w: *sigma_w };
            let model = Lgssm::new(params, free.clone(), init)?;
            let truth = model.theta_of(&params);
            let obs = load_data(&model, &truth, data)?;
            let theta = given.unwrap_or(truth);
            let k = kalman_score_oim_oracle(&model, &theta, &obs)?;
            let o = Oracle {
                score: k.score.values.clone(),
                oim: k.oim.values().clone(),
                accuracy_warning: k.warning.map(|w| w.max_error),
            };
            (PreparedModel::Lgssm { model, obs }, theta, Some(o))
        }
        ModelSpec::ScaleMixture { phi, sigma_v, sigma_w, burn_in, data } => {
            let model = ScaleMixtureAr::new(*burn_in);
            let truth = vec![*phi, sigma_v.ln(), sigma_w.ln()];
            let obs = load_data(&model, &truth, data)?;
            (PreparedModel::Mixture { model, obs }, given.unwrap_or(truth), None)
        }
    };
    kernel.check_dim(theta.len())?;
    Ok(Prepared { model, theta, kernel, oracle })
}

/// Exact Kalman likelihood as a [`LogLikelihood`]. Invalid parameters map
/// to `-inf`.
struct KalmanLoglik<'a> {
    model: &'a Lgssm<f64>,
    obs: &'a ObservationSequence<f64>,
}

impl LogLikelihood<f64> for KalmanLoglik<'_> {
    fn dim(&self) -> usize {
        self.model.free().len()
    }

    fn log_likelihood(&self, theta: &[f64], _rng: &mut dyn RngCore) -> f64 {
        self.model.kalman_loglik(theta, self.obs).unwrap_or(f64::NEG_INFINITY)
    }
}

/// Bootstrap particle filter likelihood estimate at a fixed parameter.
pub struct SmcLoglik<'a, M> {
    pub model: &'a M,
    pub obs: &'a ObservationSequence<f64>,
    pub n_particles: usize,
    pub resampling: ResamplingScheme,
}

impl<M: StateSpaceModel<f64>> LogLikelihood<f64> for SmcLoglik<'_, M> {
    fn dim(&self) -> usize {
        self.model.param_dim()
    }

    fn log_likelihood(&self, theta: &[f64], mut rng: &mut dyn RngCore) -> f64 {
        let kernel = PerturbationKernel::isotropic(theta.len(), 1.0).expect("non-empty theta");
        let mut cfg = ExtendedFilterConfig::new(theta.to_vec(), 0.0, kernel, 0, self.n_particles, 0);
        cfg.resampling = self.resampling;
        run_extended_bootstrap_with(self.model, self.obs, &cfg, &mut rng, |_| {}).map_or(f64::NAN, |acc| acc.loglik())
    }
}

/// Score vector or information matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimate {
    Score(Vec<f64>),
    Oim(Matrix<f64>),
}

fn from_moments(kind: EstimatorKind, prep: &Prepared, m: &PosteriorMoments<f64>, tau: Tau<f64>) -> Result<Estimate> {
    if kind.is_oim() {
        Ok(Estimate::Oim(oim_general(m, tau, &prep.kernel)?.values().clone()))
    } else {
        Ok(Estimate::Score(score_general(m, &prep.theta, tau, &prep.kernel)?.values))
    }
}

fn general_estimate(kind: EstimatorKind, prep: &Prepared, ll: &dyn LogLikelihood<f64>, pt: &GridPoint, seed: u64) -> Result<Estimate> {
    let tau = || Tau::new(pt.tau);
    match kind {
        EstimatorKind::IsScore | EstimatorKind::IsOim => {
            let m = posterior_moments_is(ll, &prep.theta, tau()?, &prep.kernel, pt.n, &mut stream(seed))?;
            from_moments(kind, prep, &m, tau()?)
        }
        EstimatorKind::QuadScore | EstimatorKind::QuadOim => {
            let m = posterior_moments_quadrature(ll, &prep.theta, tau()?, &prep.kernel, GridSpec::default())?;
            from_moments(kind, prep, &m, tau()?)
        }
        EstimatorKind::FdScore => Ok(Estimate::Score(fd_score(ll, &prep.theta, &FdConfig::new(pt.h, seed)?)?.values)),
        EstimatorKind::FdOim => Ok(Estimate::Oim(fd_oim(ll, &prep.theta, &FdConfig::new(pt.h, seed)?)?.values().clone())),
        _ => unreachable!("dispatched elsewhere"),
    }
}

fn smc_estimate<M: StateSpaceModel<f64>>(
    kind: EstimatorKind,
    prep: &Prepared,
    model: &M,
    obs: &ObservationSequence<f64>,
    pt: &GridPoint,
    resampling: ResamplingScheme,
    seed: u64,
) -> Result<Estimate> {
    let tau = Tau::new(pt.tau)?;
    let mut cfg = ExtendedFilterConfig::new(prep.theta.clone(), pt.tau, prep.kernel.clone(), pt.lag, pt.n, seed);
    cfg.resampling = resampling;
    let acc = run_extended_bootstrap(model, obs, &cfg)?;
    if kind.is_oim() {
        Ok(Estimate::Oim(oim_ssm(&acc, tau, &prep.kernel)?.values().clone()))
    } else {
        Ok(Estimate::Score(score_ssm(&acc, &prep.theta, tau, &prep.kernel)?.values))
    }
}

/// Runs one estimator once on the stream seeded by `seed`.
pub fn estimate_once(exp: &Experiment, prep: &Prepared, kind: EstimatorKind, pt: &GridPoint, seed: u64) -> Result<Estimate> {
    if kind == EstimatorKind::Oracle {
        let o = prep.oracle.as_ref().ok_or_else(|| Error::InvalidParameter("no oracle for this model".into()))?;
        return Ok(Estimate::Score(o.score.clone()));
    }
    let smc_ll = |n| kind.is_fd() && exp.fd_loglik == FdLoglik::Smc && n > 0;
    match &prep.model {
        PreparedModel::Gaussian(m) => general_estimate(kind, prep, m, pt, seed),
        PreparedModel::Poisson(m) => general_estimate(kind, prep, m, pt, seed),
        PreparedModel::Quartic(m) => general_estimate(kind, prep, m, pt, seed),
        PreparedModel::Lgssm { model, obs } if kind.is_smc() => smc_estimate(kind, prep, model, obs, pt, exp.resampling, seed),
        PreparedModel::Lgssm { model, obs } if smc_ll(pt.n) => {
            let ll = SmcLoglik { model, obs, n_particles: pt.n, resampling: exp.resampling };
            general_estimate(kind, prep, &ll, pt, seed)
        }
        PreparedModel::Lgssm { model, obs } => general_estimate(kind, prep, &KalmanLoglik { model, obs }, pt, seed),
        PreparedModel::Mixture { model, obs } if kind.is_smc() => smc_estimate(kind, prep, model, obs, pt, exp.resampling, seed),
        PreparedModel::Mixture { model, obs } if kind.is_fd() => {
            let ll = SmcLoglik { model, obs, n_particles: pt.n, resampling: exp.resampling };
            general_estimate(kind, prep, &ll, pt, seed)
        }
        PreparedModel::Mixture { .. } => {
            Err(Error::InvalidParameter(format!("{} needs an exact likelihood", kind.name())))
        }
    }
}

/// Number of particles (or importance samples) behind one estimate, if any.
fn particles_for(exp: &Experiment, prep: &Prepared, kind: EstimatorKind, pt: &GridPoint) -> Option<usize> {
    match kind {
        EstimatorKind::IsScore | EstimatorKind::IsOim | EstimatorKind::SmcScore | EstimatorKind::SmcOim => Some(pt.n),
        EstimatorKind::FdScore | EstimatorKind::FdOim if prep.horizon().is_some() && exp.fd_loglik == FdLoglik::Smc => {
            Some(pt.n)
        }
        _ => None,
    }
}

fn components(kind: EstimatorKind, d: usize) -> Vec<(usize, Option<usize>)> {
    if kind.is_oim() {
        (0..d).flat_map(|i| (0..d).map(move |j| (i, Some(j)))).collect()
    } else {
        (0..d).map(|i| (i, None)).collect()
    }
}

fn oracle_value(o: &Oracle, i: usize, j: Option<usize>) -> f64 {
    match j {
        None => o.score[i],
        Some(j) => o.oim[(i, j)],
    }
}

/// Runs `exp.replications` replications of `kind` at every point and
/// returns the records sorted by run id and component.
pub fn run_experiment(exp: &Experiment, prep: &Prepared, kind: EstimatorKind, points: &[GridPoint]) -> Vec<RunRecord> {
    let reps = exp.replications;
    let tasks: Vec<(GridPoint, usize)> = points.iter().flat_map(|p| (0..reps).map(move |r| (*p, r))).collect();
    let mut records: Vec<RunRecord> = tasks
        .into_par_iter()
        .flat_map_iter(|(pt, r)| {
            let seed = derive_seed(exp.seed, &[pt.index as u64, r as u64]);
            let start = Instant::now();
            let result = estimate_once(exp, prep, kind, &pt, seed);
            let elapsed = exp.record_timing.then(|| start.elapsed().as_secs_f64() * 1e3);
            let base = RunRecord {
                run_id: (pt.index * reps + r) as u64,
                seed,
                method: kind.name().to_string(),
                tau: kind.uses_tau().then_some(pt.tau),
                h: kind.is_fd().then_some(pt.h),
                delta: kind.is_smc().then_some(pt.lag),
                n_particles: particles_for(exp, prep, kind, &pt),
                horizon: prep.horizon(),
                i: 0,
                j: None,
                estimate: None,
                oracle: None,
                abs_error: None,
                wall_time_ms: elapsed,
                error: None,
            };
            components(kind, prep.dim())
                .into_iter()
                .map(|(i, j)| {
                    let oracle = prep.oracle.as_ref().map(|o| oracle_value(o, i, j));
                    let (estimate, error) = match &result {
                        Ok(Estimate::Score(s)) => (Some(s[i]), None),
                        Ok(Estimate::Oim(m)) => (Some(m[(i, j.expect("matrix component"))]), None),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    let abs_error = estimate.zip(oracle).map(|(e, o)| (e - o).abs());
                    RunRecord { i, j, estimate, oracle, abs_error, error, ..base.clone() }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    sort_records(&mut records);
    records
}

/// Oracle score and information at the evaluation point, one record per
/// component (`j` empty for the score).
pub fn oracle_records(exp: &Experiment, prep: &Prepared) -> Result<Vec<RunRecord>> {
    let o = prep.oracle.as_ref().ok_or_else(|| Error::InvalidParameter("no oracle for this model".into()))?;
    let d = prep.dim();
    let mut comps = components(EstimatorKind::IsScore, d);
    comps.extend(components(EstimatorKind::IsOim, d));
    Ok(comps
        .into_iter()
        .map(|(i, j)| {
            let v = oracle_value(o, i, j);
            RunRecord {
                run_id: 0,
                seed: exp.seed,
                method: EstimatorKind::Oracle.name().to_string(),
                tau: None,
                h: None,
                delta: None,
                n_particles: None,
                horizon: prep.horizon(),
                i,
                j,
                estimate: Some(v),
                oracle: Some(v),
                abs_error: Some(0.0),
                wall_time_ms: None,
                error: o.accuracy_warning.map(|e| format!("oracle extrapolation error {e:e} above threshold")),
            }
        })
        .collect())
}

/// Likelihood evaluations consumed by one finite-difference estimate.
pub fn fd_budget_evaluations(kind: EstimatorKind, d: usize) -> usize {
    fd_evaluations(d, kind.is_oim())
}
