//! Per-iteration aggregation of records across seeds.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::run::RunRecord;

/// Mean and population standard deviation of each metric at one iteration,
/// taken across seeds (NaN entries are skipped).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub iter: usize,
    pub mean_linf: f64,
    pub std_linf: f64,
    pub mean_logdet: f64,
    pub std_logdet: f64,
    pub mean_delta: f64,
    pub std_delta: f64,
    pub mean_accepted: f64,
    pub std_accepted: f64,
}

fn mean_std(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let vals: Vec<f64> = values.filter(|v| !v.is_nan()).collect();
    if vals.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Aggregate records into one row per iteration.
pub fn summarize(records: &[RunRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let max_iter = records.iter().map(|r| r.iter).max().unwrap_or(0);
    let mut rows = Vec::with_capacity(max_iter);
    for iter in 1..=max_iter {
        let at = || records.iter().filter(move |r| r.iter == iter);
        let (mean_linf, std_linf) = mean_std(at().map(|r| r.linf_error));
        let (mean_logdet, std_logdet) = mean_std(at().map(|r| r.logdet_model_err));
        let (mean_delta, std_delta) = mean_std(at().map(|r| r.delta));
        let (mean_accepted, std_accepted) = mean_std(at().map(|r| r.accepted as f64));
        rows.push(SummaryRow {
            iter,
            mean_linf,
            std_linf,
            mean_logdet,
            std_logdet,
            mean_delta,
            std_delta,
            mean_accepted,
            std_accepted,
        });
    }
    Ok(rows)
}

pub fn to_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from(
        "iter,mean_linf,std_linf,mean_logdet,std_logdet,mean_delta,std_delta,mean_accepted,std_accepted\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.iter,
            r.mean_linf,
            r.std_linf,
            r.mean_logdet,
            r.std_logdet,
            r.mean_delta,
            r.std_delta,
            r.mean_accepted,
            r.std_accepted
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(seed: u64, iter: usize, linf: f64, logdet: f64) -> RunRecord {
        RunRecord {
            seed,
            iter,
            linf_error: linf,
            logdet_model_err: logdet,
            delta: 0.3,
            accepted: 2,
            input: vec![0.0, 0.0],
            ell_mean: [0.0, 0.0],
            ell_cov: [1.0, 0.0, 1.0],
        }
    }

    #[test]
    fn single_seed_has_zero_std() {
        let rows = summarize(&[record(0, 1, 0.5, -1.0), record(0, 2, 0.25, -2.0)]).unwrap();
        assert_eq!(rows.len(), 2);
        for row in rows {
            assert_eq!(row.std_linf, 0.0);
            assert_eq!(row.std_logdet, 0.0);
        }
    }

    #[test]
    fn constant_metric_summarizes_to_mean_c_std_zero() {
        let rows = summarize(&[
            record(0, 1, 0.7, -3.0),
            record(1, 1, 0.7, -3.0),
            record(2, 1, 0.7, -3.0),
        ])
        .unwrap();
        assert!((rows[0].mean_linf - 0.7).abs() < 1e-15);
        assert!(rows[0].std_linf < 1e-15);
        assert_eq!(rows[0].mean_logdet, -3.0);
    }

    #[test]
    fn nan_entries_are_skipped() {
        let rows = summarize(&[record(0, 1, f64::NAN, -1.0), record(1, 1, 0.5, -3.0)]).unwrap();
        assert_eq!(rows[0].mean_linf, 0.5);
        assert_eq!(rows[0].mean_logdet, -2.0);
    }

    #[test]
    fn empty_records_error() {
        assert!(matches!(summarize(&[]), Err(Error::EmptyRecords)));
    }
}
