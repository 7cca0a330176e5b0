//! Experiment harness: configuration, seeded replications, sweeps, rate
//! fits and finite-difference comparisons.

pub mod compare;
pub mod config;
pub mod records;
pub mod runner;
pub mod slope;

pub use compare::{compare_fd, write_comparison_csv, ComparisonRow, COMPARISON_HEADER, COMPARISON_HEADER_NO_ORACLE};
pub use config::{EstimatorKind, Experiment, ExperimentConfig, FdLoglik, ModelSpec};
pub use records::{write_records_csv, RunRecord, RUN_RECORD_HEADER, RUN_RECORD_SCHEMA_VERSION};
pub use runner::{estimate_once, grid_points, oracle_records, prepare, run_experiment, Estimate, GridPoint, Oracle, Prepared, Sweep};
pub use slope::{fit_log_log, fit_rate_slope, SlopeFit, XField, YAggregate};
