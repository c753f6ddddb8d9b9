use std::path::Path;

use serde::Serialize;

use super::sweep::SweepReport;
use crate::{Error, Result};

/// Error distribution for one noise level, meters. Failed rows are counted
/// but excluded from the statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorSummary {
    pub sigma: f64,
    pub count: usize,
    pub failures: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub(crate) fn summarize(sigma: f64, errors: &[f64], failures: usize) -> ErrorSummary {
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.is_empty() {
        return ErrorSummary {
            sigma,
            count: 0,
            failures,
            mean: f64::NAN,
            median: f64::NAN,
            q1: f64::NAN,
            q3: f64::NAN,
            min: f64::NAN,
            max: f64::NAN,
        };
    }
    ErrorSummary {
        sigma,
        count: sorted.len(),
        failures,
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        median: quantile(&sorted, 0.5),
        q1: quantile(&sorted, 0.25),
        q3: quantile(&sorted, 0.75),
        min: sorted[0],
        max: sorted[sorted.len() - 1],
    }
}

/// Per-sigma statistics, ordered by increasing sigma.
pub fn summarize_errors(report: &SweepReport) -> Result<Vec<ErrorSummary>> {
    if report.rows.is_empty() {
        return Err(Error::invalid("sweep report has no rows"));
    }
    let mut sigmas: Vec<f64> = report.rows.iter().map(|r| r.sigma).collect();
    sigmas.sort_by(f64::total_cmp);
    sigmas.dedup();
    Ok(sigmas
        .into_iter()
        .map(|s| {
            let rows = report.rows.iter().filter(|r| r.sigma == s);
            let errors: Vec<f64> = rows.clone().filter(|r| r.is_ok()).map(|r| r.error_m).collect();
            let failures = rows.filter(|r| !r.is_ok()).count();
            summarize(s, &errors, failures)
        })
        .collect())
}

pub fn write_summary_csv(path: impl AsRef<Path>, summary: &[ErrorSummary]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for s in summary {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}
