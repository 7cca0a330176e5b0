//! Bootstrap particle filter on the model extended with per-step
//! perturbed parameters, and the fixed-lag score / information estimates
//! built from it.

mod accumulator;
mod estimators;
mod filter;
mod resample;

pub use accumulator::{CrossCovariance, FixedLagAccumulator};
pub use estimators::{oim_ssm, score_ssm};
pub use filter::{run_extended_bootstrap, run_extended_bootstrap_with, ExtendedFilterConfig, StepView};
pub use resample::{resample, ResamplingScheme};
