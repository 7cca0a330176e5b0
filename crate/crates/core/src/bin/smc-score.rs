//! `smc-score` command-line harness.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use smc_score::harness::{
    compare_fd, fit_rate_slope, grid_points, oracle_records, prepare, run_experiment, write_comparison_csv,
    write_records_csv, EstimatorKind, Experiment, ExperimentConfig, RunRecord, Sweep, XField, YAggregate,
};
use smc_score::Error;

#[derive(Parser)]
#[command(name = "smc-score", version, about = "Score and observed information estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One grid point (first entry of every grid), R replications.
    Estimate(Common),
    /// Sweep the tau grid (the h grid for fd-* methods).
    SweepTau(Common),
    /// Sweep the n grid.
    SweepN(Common),
    /// Sweep the lag grid.
    SweepLag(Common),
    /// Finite differences vs the proposed estimator at a matched budget.
    CompareFd(Common),
    /// Oracle score and observed information.
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_ALL_FAILED: u8 = 3;

fn load(common: &Common) -> Result<Experiment, Error> {
    let mut exp = ExperimentConfig::from_path(&common.config)?.validate()?;
    if let Some(seed) = common.seed {
        exp.seed = seed;
    }
    Ok(exp)
}

fn output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn report_slopes(exp: &Experiment, sweep: Sweep, records: &[RunRecord]) {
    let (x, y) = match sweep {
        Sweep::Tau if exp.method.is_fd() => (XField::H, YAggregate::MeanAbsBias),
        Sweep::Tau => (XField::Tau, YAggregate::MeanAbsBias),
        Sweep::N => (XField::NParticles, YAggregate::MeanSquaredError),
        Sweep::Lag | Sweep::Single => return,
    };
    let mut comps: Vec<(usize, Option<usize>)> = records.iter().map(|r| (r.i, r.j)).collect();
    comps.sort();
    comps.dedup();
    for (i, j) in comps {
        let sub: Vec<RunRecord> = records.iter().filter(|r| r.i == i && r.j == j).cloned().collect();
        let label = j.map_or(format!("{i}"), |j| format!("{i},{j}"));
        match fit_rate_slope(&sub, x, y) {
            Ok(f) if f.filtered > 0 => {
                eprintln!("component {label}: slope {:.4} +/- {:.4} ({} points filtered)", f.slope, f.stderr, f.filtered)
            }
            Ok(f) => eprintln!("component {label}: slope {:.4} +/- {:.4}", f.slope, f.stderr),
            Err(e) => eprintln!("component {label}: no slope ({e})"),
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, (u8, String)> {
    let (common, sweep) = match &cli.command {
        Command::Estimate(c) => (c, Some(Sweep::Single)),
        Command::SweepTau(c) => (c, Some(Sweep::Tau)),
        Command::SweepN(c) => (c, Some(Sweep::N)),
        Command::SweepLag(c) => (c, Some(Sweep::Lag)),
        Command::CompareFd(c) | Command::Oracle(c) => (c, None),
    };
    let config_err = |e: Error| (EXIT_CONFIG, format!("config error: {e}"));
    let io_err = |e: io::Error| (1, format!("io error: {e}"));
    let exp = load(common).map_err(config_err)?;
    if let Some(k) = common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().map_err(|e| (1, e.to_string()))?;
    }
    let prep = prepare(&exp).map_err(config_err)?;
    if let Some(w) = prep.oracle.as_ref().and_then(|o| o.accuracy_warning) {
        eprintln!("warning: oracle extrapolation error {w:e} exceeds the accuracy threshold");
    }

    let mut out = output(&common.out).map_err(io_err)?;
    let all_failed = match (&cli.command, sweep) {
        (Command::Oracle(_), _) => {
            let records = oracle_records(&exp, &prep).map_err(config_err)?;
            write_records_csv(&mut out, &records).map_err(|e| (1, e.to_string()))?;
            false
        }
        (Command::CompareFd(_), _) => {
            let rows = compare_fd(&exp, &prep).map_err(config_err)?;
            write_comparison_csv(&mut out, &rows).map_err(|e| (1, e.to_string()))?;
            rows.iter().all(|r| r.replications == 0)
        }
        (_, Some(sweep)) => {
            let points = grid_points(&exp, sweep);
            let records = run_experiment(&exp, &prep, exp.method, &points);
            write_records_csv(&mut out, &records).map_err(|e| (1, e.to_string()))?;
            if exp.method != EstimatorKind::Oracle {
                report_slopes(&exp, sweep, &records);
            }
            records.iter().all(|r| r.error.is_some())
        }
        _ => unreachable!(),
    };
    out.flush().map_err(io_err)?;
    if all_failed {
        return Err((EXIT_ALL_FAILED, "all runs failed".into()));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err((code, msg)) => {
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}
