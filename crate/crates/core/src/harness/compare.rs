//! Finite differences against the proposed estimator at a matched budget.

use std::io::Write;

use super::config::{EstimatorKind, Experiment, FdLoglik};
use super::records::RunRecord;
use super::runner::{fd_budget_evaluations, grid_points, run_experiment, GridPoint, Prepared, Sweep};
use crate::error::{Error, Result};

/// Summary of one method on one component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub method: String,
    pub i: usize,
    pub j: Option<usize>,
    /// Particles (or importance samples) summed over all likelihood
    /// estimates behind one replication; evaluations for exact FD.
    pub budget: usize,
    /// Successful replications.
    pub replications: usize,
    pub mean: f64,
    pub oracle: Option<f64>,
    pub bias: Option<f64>,
    pub variance: f64,
    pub mse: Option<f64>,
    /// Variance over the variance of the proposed method on the same
    /// component.
    pub variance_ratio: f64,
}

fn summarize(records: &[RunRecord], method: &str, budget: usize, i: usize, j: Option<usize>) -> ComparisonRow {
    let vals: Vec<f64> = records.iter().filter(|r| r.i == i && r.j == j).filter_map(|r| r.estimate).collect();
    let oracle = records.iter().find(|r| r.i == i && r.j == j).and_then(|r| r.oracle);
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let variance = if vals.len() > 1 { vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    ComparisonRow {
        method: method.to_string(),
        i,
        j,
        budget,
        replications: vals.len(),
        mean,
        oracle,
        bias: oracle.map(|o| mean - o),
        variance,
        mse: oracle.map(|o| vals.iter().map(|v| (v - o).powi(2)).sum::<f64>() / n),
        variance_ratio: 1.0,
    }
}

/// Runs the proposed estimator with budget `N = grid.n[0]` and the
/// finite-difference estimator of the same quantity. For particle
/// likelihoods each of the `k` FD evaluations gets `N / k` particles.
///
/// The proposed method is `smc-*` on state-space models and `is-*`
/// otherwise; the configured method only selects score or information.
pub fn compare_fd(exp: &Experiment, prep: &Prepared) -> Result<Vec<ComparisonRow>> {
    let oim = exp.method.is_oim();
    let (proposed, fd) = match (prep.horizon().is_some(), oim) {
        (true, false) => (EstimatorKind::SmcScore, EstimatorKind::FdScore),
        (true, true) => (EstimatorKind::SmcOim, EstimatorKind::FdOim),
        (false, false) => (EstimatorKind::IsScore, EstimatorKind::FdScore),
        (false, true) => (EstimatorKind::IsOim, EstimatorKind::FdOim),
    };
    let base = grid_points(exp, Sweep::Single)[0];
    let budget = base.n;
    let k = fd_budget_evaluations(fd, prep.dim());
    let particle_fd = prep.horizon().is_some() && exp.fd_loglik == FdLoglik::Smc;
    let (fd_n, fd_budget) = if particle_fd {
        let per = budget / k;
        if per < 2 {
            return Err(Error::InvalidParameter(format!("budget {budget} leaves fewer than 2 particles for each of {k} FD evaluations")));
        }
        (per, per * k)
    } else {
        (base.n, k)
    };

    let prop_pt = GridPoint { index: 0, ..base };
    let fd_pt = GridPoint { index: 1, n: fd_n, ..base };
    let prop_records = run_experiment(exp, prep, proposed, &[prop_pt]);
    let fd_records = run_experiment(exp, prep, fd, &[fd_pt]);

    let d = prep.dim();
    let comps: Vec<(usize, Option<usize>)> =
        if oim { (0..d).flat_map(|i| (0..d).map(move |j| (i, Some(j)))).collect() } else { (0..d).map(|i| (i, None)).collect() };
    let mut rows = Vec::with_capacity(2 * comps.len());
    for (i, j) in comps {
        let p = summarize(&prop_records, proposed.name(), budget, i, j);
        let mut f = summarize(&fd_records, fd.name(), fd_budget, i, j);
        f.variance_ratio = f.variance / p.variance;
        rows.push(p);
        rows.push(f);
    }
    Ok(rows)
}

pub const COMPARISON_HEADER: &str = "method,i,j,budget,replications,mean,oracle,bias,variance,mse,variance_ratio";
pub const COMPARISON_HEADER_NO_ORACLE: &str = "method,i,j,budget,replications,mean,variance,variance_ratio";

/// Writes the table; the oracle, bias and mse columns are left out when no
/// row has an oracle.
pub fn write_comparison_csv<W: Write>(mut w: W, rows: &[ComparisonRow]) -> Result<()> {
    let with_oracle = rows.iter().any(|r| r.oracle.is_some());
    writeln!(w, "{}", if with_oracle { COMPARISON_HEADER } else { COMPARISON_HEADER_NO_ORACLE })?;
    for r in rows {
        let j = r.j.map(|j| j.to_string()).unwrap_or_default();
        write!(w, "{},{},{},{},{},{}", r.method, r.i, j, r.budget, r.replications, r.mean)?;
        if with_oracle {
            let f = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
            write!(w, ",{},{},{},{}", f(r.oracle), f(r.bias), r.variance, f(r.mse))?;
        } else {
            write!(w, ",{}", r.variance)?;
        }
        writeln!(w, ",{}", r.variance_ratio)?;
    }
    Ok(())
}
