//! Log-log rate fits.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::records::RunRecord;

/// Abscissa taken from a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XField {
    Tau,
    H,
    NParticles,
    Delta,
}

impl XField {
    pub fn get(self, r: &RunRecord) -> Option<f64> {
        match self {
            XField::Tau => r.tau,
            XField::H => r.h,
            XField::NParticles => r.n_particles.map(|n| n as f64),
            XField::Delta => r.delta.map(|d| d as f64),
        }
    }
}

/// Per-x aggregate of `estimate - oracle`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YAggregate {
    MeanSquaredError,
    MeanAbsBias,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    /// `(x, aggregate)` pairs that entered the fit.
    pub points: Vec<(f64, f64)>,
    /// Points dropped because `x` or the aggregate was not positive.
    pub filtered: usize,
}

/// OLS of `ln y` on `ln x`. Non-positive or non-finite pairs are dropped
/// and counted in `filtered`.
pub fn fit_log_log(points: &[(f64, f64)]) -> Result<SlopeFit> {
    let kept: Vec<(f64, f64)> = points.iter().copied().filter(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()).collect();
    let filtered = points.len() - kept.len();
    let mut xs: Vec<f64> = kept.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(Error::TooFewPoints { required: 3, found: xs.len() });
    }
    let n = kept.len() as f64;
    let lx: Vec<f64> = kept.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = kept.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = if kept.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(SlopeFit { slope, stderr, intercept, points: kept, filtered })
}

/// Groups `records` by `x_field`, aggregates the error against the oracle
/// and fits a log-log slope. Records without an estimate or oracle are
/// skipped. Callers filter to a single component first.
pub fn fit_rate_slope(records: &[RunRecord], x_field: XField, y: YAggregate) -> Result<SlopeFit> {
    let mut groups: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    for r in records {
        let (Some(x), Some(e), Some(o)) = (x_field.get(r), r.estimate, r.oracle) else {
            continue;
        };
        groups.entry(x.to_bits()).or_insert_with(|| (x, Vec::new())).1.push(e - o);
    }
    let points: Vec<(f64, f64)> = groups
        .into_values()
        .map(|(x, errs)| {
            let n = errs.len() as f64;
            let agg = match y {
                YAggregate::MeanSquaredError => errs.iter().map(|e| e * e).sum::<f64>() / n,
                YAggregate::MeanAbsBias => (errs.iter().sum::<f64>() / n).abs(),
            };
            (x, agg)
        })
        .collect();
    fit_log_log(&points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_square() {
        let pts: Vec<_> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x| (x, x * x)).collect();
        let f = fit_log_log(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!(f.stderr < 1e-12);
    }

    #[test]
    fn inverse() {
        let pts: Vec<_> = [10.0, 100.0, 1000.0, 1e4].iter().map(|&x| (x, 3.0 / x)).collect();
        assert!((fit_log_log(&pts).unwrap().slope + 1.0).abs() < 1e-12);
    }

    #[test]
    fn filters_and_requires_three_x() {
        let pts = [(1.0, 1.0), (2.0, 0.0), (3.0, 9.0), (4.0, -1.0)];
        assert!(matches!(fit_log_log(&pts), Err(Error::TooFewPoints { found: 2, .. })));
        let pts = [(1.0, 1.0), (2.0, 0.0), (3.0, 9.0), (4.0, 16.0)];
        let f = fit_log_log(&pts).unwrap();
        assert_eq!(f.filtered, 1);
        assert!((f.slope - 2.0).abs() < 1e-12);
    }
}
