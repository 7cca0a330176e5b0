//! Experiment configuration.
//!
//! TOML with four sections. Example:
//!
//! ```toml
//! [model]
//! kind = "lgssm"          # gaussian | poisson | quartic | lgssm | scale-mixture
//! phi = 0.8
//! sigma_v = 1.0
//! sigma_w = 0.5
//! horizon = 50
//! data_seed = 7
//!
//! [estimator]
//! method = "smc-score"    # is-score | is-oim | quad-score | quad-oim | fd-score
//!                         # | fd-oim | smc-score | smc-oim | oracle
//! kernel_sigmas = [1.0, 1.0, 1.0]
//!
//! [grid]
//! tau = [0.05]
//! n = [5000]
//! lag = [10]
//!
//! [run]
//! replications = 20
//! seed = 42
//! ```
//!
//! Every key is documented on the corresponding struct field.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::smc::ResamplingScheme;
use crate::ssm::LgssmCoord;

fn cfg_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), message: message.into() }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub grid: GridSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: String,
    /// gaussian: likelihood centers, one per coordinate.
    pub observations: Option<Vec<f64>>,
    /// gaussian: likelihood scales (default 1).
    pub scales: Option<Vec<f64>>,
    /// poisson: observed count.
    pub count: Option<f64>,
    /// quartic: dimension.
    pub dim: Option<usize>,
    /// lgssm / scale-mixture: data-generating parameters.
    pub phi: Option<f64>,
    pub sigma_v: Option<f64>,
    pub sigma_w: Option<f64>,
    /// lgssm: free coordinates, subset of phi, log_sigma_v, log_sigma_w.
    pub free: Option<Vec<String>>,
    /// lgssm: "stationary" (default) or "fixed".
    pub init: Option<String>,
    pub init_mean: Option<f64>,
    pub init_variance: Option<f64>,
    /// state-space models: number of simulated observations.
    pub horizon: Option<usize>,
    /// state-space models: seed of the simulated dataset.
    pub data_seed: Option<u64>,
    /// state-space models: read observations from a `t,y` CSV instead.
    pub data: Option<PathBuf>,
    /// scale-mixture: burn-in steps for the initial state.
    pub burn_in: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    pub method: String,
    /// Evaluation point; defaults to the data-generating parameter for
    /// state-space models. Required for the other models.
    pub theta: Option<Vec<f64>>,
    /// Kernel standard deviations (default 1 per coordinate).
    pub kernel_sigmas: Option<Vec<f64>>,
    /// "multinomial" (default) or "systematic".
    pub resampling: Option<String>,
    /// Likelihood used by finite differences on state-space models:
    /// "smc" (default) or "exact" (Kalman, lgssm only).
    pub fd_loglik: Option<String>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_tau")]
    pub tau: Vec<f64>,
    #[serde(default = "default_n")]
    pub n: Vec<usize>,
    #[serde(default = "default_lag")]
    pub lag: Vec<usize>,
    #[serde(default = "default_h")]
    pub h: Vec<f64>,
    /// When set, `tau = tau_scale * n^tau_exponent` replaces the tau grid.
    pub tau_exponent: Option<f64>,
    #[serde(default = "one")]
    pub tau_scale: f64,
    /// When set, `h = h_scale * n^h_exponent` replaces the h grid.
    pub h_exponent: Option<f64>,
    #[serde(default = "one")]
    pub h_scale: f64,
}

fn default_tau() -> Vec<f64> {
    vec![0.1]
}
fn default_n() -> Vec<usize> {
    vec![1000]
}
fn default_lag() -> Vec<usize> {
    vec![10]
}
fn default_h() -> Vec<f64> {
    vec![0.1]
}
fn one() -> f64 {
    1.0
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            tau: default_tau(),
            n: default_n(),
            lag: default_lag(),
            h: default_h(),
            tau_exponent: None,
            tau_scale: 1.0,
            h_exponent: None,
            h_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "one_usize")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    /// Fill the `wall_time_ms` column. Off by default since timings make
    /// output non-reproducible.
    #[serde(default)]
    pub record_timing: bool,
}

fn one_usize() -> usize {
    1
}

impl Default for RunSection {
    fn default() -> Self {
        Self { replications: 1, seed: 0, record_timing: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    IsScore,
    IsOim,
    QuadScore,
    QuadOim,
    FdScore,
    FdOim,
    SmcScore,
    SmcOim,
    Oracle,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 9] = [
        Self::IsScore,
        Self::IsOim,
        Self::QuadScore,
        Self::QuadOim,
        Self::FdScore,
        Self::FdOim,
        Self::SmcScore,
        Self::SmcOim,
        Self::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::IsScore => "is-score",
            Self::IsOim => "is-oim",
            Self::QuadScore => "quad-score",
            Self::QuadOim => "quad-oim",
            Self::FdScore => "fd-score",
            Self::FdOim => "fd-oim",
            Self::SmcScore => "smc-score",
            Self::SmcOim => "smc-oim",
            Self::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Whether the output is a matrix.
    pub fn is_oim(self) -> bool {
        matches!(self, Self::IsOim | Self::QuadOim | Self::FdOim | Self::SmcOim)
    }

    pub fn uses_tau(self) -> bool {
        matches!(self, Self::IsScore | Self::IsOim | Self::QuadScore | Self::QuadOim | Self::SmcScore | Self::SmcOim)
    }

    pub fn is_fd(self) -> bool {
        matches!(self, Self::FdScore | Self::FdOim)
    }

    pub fn is_smc(self) -> bool {
        matches!(self, Self::SmcScore | Self::SmcOim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdLoglik {
    Smc,
    Exact,
}

/// Fully validated model description.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Gaussian { observations: Vec<f64>, scales: Vec<f64> },
    Poisson { count: f64 },
    Quartic { dim: usize },
    Lgssm { phi: f64, sigma_v: f64, sigma_w: f64, free: Vec<LgssmCoord>, init: LgssmInit, data: DataSource },
    ScaleMixture { phi: f64, sigma_v: f64, sigma_w: f64, burn_in: usize, data: DataSource },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LgssmInit {
    Stationary,
    Fixed { mean: f64, variance: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Simulated { horizon: usize, seed: u64 },
    File(PathBuf),
}

impl ModelSpec {
    pub fn param_dim(&self) -> usize {
        match self {
            ModelSpec::Gaussian { observations, .. } => observations.len(),
            ModelSpec::Poisson { .. } => 1,
            ModelSpec::Quartic { dim } => *dim,
            ModelSpec::Lgssm { free, .. } => free.len(),
            ModelSpec::ScaleMixture { .. } => 3,
        }
    }

    pub fn is_state_space(&self) -> bool {
        matches!(self, ModelSpec::Lgssm { .. } | ModelSpec::ScaleMixture { .. })
    }
}

/// Validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub model: ModelSpec,
    pub method: EstimatorKind,
    pub theta: Option<Vec<f64>>,
    pub kernel_sigmas: Vec<f64>,
    pub resampling: ResamplingScheme,
    pub fd_loglik: FdLoglik,
    pub grid: GridSection,
    pub replications: usize,
    pub seed: u64,
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let key = msg
                .split('`')
                .nth(1)
                .map(str::to_string)
                .or_else(|| e.span().map(|s| text[s].trim().to_string()))
                .unwrap_or_else(|| "<document>".into());
            cfg_err(&key, msg)
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| cfg_err("<file>", format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<Experiment> {
        let model = self.model.resolve()?;
        let method = EstimatorKind::parse(&self.estimator.method).ok_or_else(|| {
            let names: Vec<_> = EstimatorKind::ALL.iter().map(|k| k.name()).collect();
            cfg_err("estimator.method", format!("unknown method `{}`; expected one of {names:?}", self.estimator.method))
        })?;
        let d = model.param_dim();

        if method.is_smc() && !model.is_state_space() {
            return Err(cfg_err("estimator.method", "smc estimators need a state-space model"));
        }
        if matches!(method, EstimatorKind::QuadScore | EstimatorKind::QuadOim) && d > 2 {
            return Err(cfg_err("estimator.method", "quadrature supports at most 2 parameters"));
        }
        if matches!(model, ModelSpec::ScaleMixture { .. }) && !(method.is_smc() || method.is_fd()) {
            return Err(cfg_err("estimator.method", "scale-mixture has no exact likelihood; use smc-* or fd-*"));
        }

        let theta = match &self.estimator.theta {
            Some(t) => {
                if t.len() != d {
                    return Err(cfg_err("estimator.theta", format!("expected {d} entries, got {}", t.len())));
                }
                if t.iter().any(|v| !v.is_finite()) {
                    return Err(cfg_err("estimator.theta", "entries must be finite"));
                }
                Some(t.clone())
            }
            None if model.is_state_space() => None,
            None => return Err(cfg_err("estimator.theta", "required for this model")),
        };

        let kernel_sigmas = match &self.estimator.kernel_sigmas {
            Some(s) if s.len() != d => {
                return Err(cfg_err("estimator.kernel_sigmas", format!("expected {d} entries, got {}", s.len())))
            }
            Some(s) if s.iter().any(|&v| !(v > 0.0) || !v.is_finite()) => {
                return Err(cfg_err("estimator.kernel_sigmas", "entries must be positive"))
            }
            Some(s) => s.clone(),
            None => vec![1.0; d],
        };

        let resampling = match self.estimator.resampling.as_deref() {
            None => ResamplingScheme::Multinomial,
            Some(s) => ResamplingScheme::parse(s)
                .ok_or_else(|| cfg_err("estimator.resampling", format!("unknown scheme `{s}`")))?,
        };
        let fd_loglik = match self.estimator.fd_loglik.as_deref() {
            None | Some("smc") if model.is_state_space() => FdLoglik::Smc,
            None => FdLoglik::Exact,
            Some("exact") if !matches!(model, ModelSpec::ScaleMixture { .. }) => FdLoglik::Exact,
            Some("smc") => return Err(cfg_err("estimator.fd_loglik", "smc likelihood needs a state-space model")),
            Some(s) => return Err(cfg_err("estimator.fd_loglik", format!("unsupported value `{s}`"))),
        };

        let g = &self.grid;
        if g.tau.is_empty() || g.tau.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return Err(cfg_err("grid.tau", "must be a non-empty list of positive values"));
        }
        if g.n.is_empty() || g.n.iter().any(|&n| n < 2) {
            return Err(cfg_err("grid.n", "must be a non-empty list of values >= 2"));
        }
        if g.lag.is_empty() {
            return Err(cfg_err("grid.lag", "must be non-empty"));
        }
        if g.h.is_empty() || g.h.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(cfg_err("grid.h", "must be a non-empty list of positive values"));
        }
        if !(g.tau_scale > 0.0) {
            return Err(cfg_err("grid.tau_scale", "must be positive"));
        }
        if !(g.h_scale > 0.0) {
            return Err(cfg_err("grid.h_scale", "must be positive"));
        }
        if self.run.replications < 1 {
            return Err(cfg_err("run.replications", "must be >= 1"));
        }

        Ok(Experiment {
            model,
            method,
            theta,
            kernel_sigmas,
            resampling,
            fd_loglik,
            grid: g.clone(),
            replications: self.run.replications,
            seed: self.run.seed,
            record_timing: self.run.record_timing,
        })
    }
}

impl ModelSection {
    fn require<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
        v.ok_or_else(|| cfg_err(key, "required for this model kind"))
    }

    fn positive(v: Option<f64>, key: &str) -> Result<f64> {
        let v = Self::require(v, key)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(cfg_err(key, "must be positive"))
        }
    }

    fn data_source(&self) -> Result<DataSource> {
        match (&self.data, self.horizon) {
            (Some(p), _) => Ok(DataSource::File(p.clone())),
            (None, Some(0)) => Err(cfg_err("model.horizon", "must be >= 1")),
            (None, Some(h)) => Ok(DataSource::Simulated { horizon: h, seed: self.data_seed.unwrap_or(0) }),
            (None, None) => Err(cfg_err("model.horizon", "required unless model.data is given")),
        }
    }

    fn resolve(&self) -> Result<ModelSpec> {
        match self.kind.as_str() {
            "gaussian" => {
                let observations = self
                    .observations
                    .clone()
                    .filter(|o| !o.is_empty())
                    .ok_or_else(|| cfg_err("model.observations", "required non-empty list"))?;
                let scales = self.scales.clone().unwrap_or_else(|| vec![1.0; observations.len()]);
                if scales.len() != observations.len() || scales.iter().any(|&s| !(s > 0.0)) {
                    return Err(cfg_err("model.scales", "must be positive, one per observation"));
                }
                Ok(ModelSpec::Gaussian { observations, scales })
            }
            "poisson" => Ok(ModelSpec::Poisson { count: Self::require(self.count, "model.count")? }),
            "quartic" => match self.dim {
                Some(d) if d >= 1 => Ok(ModelSpec::Quartic { dim: d }),
                _ => Err(cfg_err("model.dim", "required, >= 1")),
            },
            "lgssm" => {
                let phi = Self::require(self.phi, "model.phi")?;
                let free = match &self.free {
                    None => LgssmCoord::ALL.to_vec(),
                    Some(names) => names
                        .iter()
                        .map(|n| LgssmCoord::parse(n).ok_or_else(|| cfg_err("model.free", format!("unknown coordinate `{n}`"))))
                        .collect::<Result<Vec<_>>>()?,
                };
                if free.is_empty() {
                    return Err(cfg_err("model.free", "must name at least one coordinate"));
                }
                let init = match self.init.as_deref() {
                    None | Some("stationary") => {
                        if phi.abs() >= 1.0 {
                            return Err(cfg_err("model.phi", "stationary start needs |phi| < 1"));
                        }
                        LgssmInit::Stationary
                    }
                    Some("fixed") => LgssmInit::Fixed {
                        mean: self.init_mean.unwrap_or(0.0),
                        variance: Self::positive(self.init_variance, "model.init_variance")?,
                    },
                    Some(s) => return Err(cfg_err("model.init", format!("unknown initial law `{s}`"))),
                };
                Ok(ModelSpec::Lgssm {
                    phi,
                    sigma_v: Self::positive(self.sigma_v, "model.sigma_v")?,
                    sigma_w: Self::positive(self.sigma_w, "model.sigma_w")?,
                    free,
                    init,
                    data: self.data_source()?,
                })
            }
            "scale-mixture" => Ok(ModelSpec::ScaleMixture {
                phi: Self::require(self.phi, "model.phi")?,
                sigma_v: Self::positive(self.sigma_v, "model.sigma_v")?,
                sigma_w: Self::positive(self.sigma_w, "model.sigma_w")?,
                burn_in: self.burn_in.unwrap_or(20),
                data: self.data_source()?,
            }),
            other => Err(cfg_err("model.kind", format!("unknown model kind `{other}`"))),
        }
    }
}
