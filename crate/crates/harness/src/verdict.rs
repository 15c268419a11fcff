//! Model-family adequacy diagnostic from the model-error covariance
//! magnitude.
//!
//! The family is flagged inadequate when the mean log det Σ_model_error
//! plateaus at a level above its first-iteration value: persistent model
//! error that further data and further fitting do not reduce.

use crate::error::{Error, Result};
use crate::run::RunRecord;
use crate::summary::summarize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Adequate,
    Inadequate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Adequate => write!(f, "adequate"),
            Verdict::Inadequate => write!(f, "inadequate"),
        }
    }
}

/// Plateau window: the last quarter of the iterations (at least 2).
fn window_len(total: usize) -> usize {
    total.div_ceil(4).max(2)
}

/// Decide adequacy from the records of one case.
///
/// Inadequate iff the mean log det Σ_model_error plateaus — range under
/// 5% of the metric's full range over the last quarter of iterations —
/// at a level above the metric's earlier minimum. The earlier minimum
/// (rather than the literal iteration-1 value) is the reference because
/// the first iterations still carry the covariance-calibration warm-up:
/// the loop takes a couple of calls to settle onto the fitted level, and
/// for an adequate family the metric never climbs back above it.
pub fn mismatch_verdict(records: &[RunRecord]) -> Result<Verdict> {
    let rows = summarize(records)?;
    let total = rows.len();
    if total < 8 {
        return Err(Error::TooFewIterations { got: total });
    }
    let series: Vec<f64> = rows.iter().map(|r| r.mean_logdet).collect();
    let window = &series[total - window_len(total)..];
    let earlier = &series[..total - window_len(total)];

    let span = |vals: &[f64]| {
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    };
    let full_range = span(&series).max(1e-12);
    let margin = 0.05 * full_range;
    let plateaued = span(window) <= margin;
    let window_mean = window.iter().sum::<f64>() / window.len() as f64;
    let settled_floor = earlier.iter().cloned().fold(f64::INFINITY, f64::min);

    if plateaued && window_mean > settled_floor + margin {
        Ok(Verdict::Inadequate)
    } else {
        Ok(Verdict::Adequate)
    }
}
