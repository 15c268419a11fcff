//! Reading and writing `records.csv`.
//!
//! Columns: seed, iter, linf_error, logdet_model_err, delta, accepted,
//! input_0..input_k, ell_m0, ell_m1, ell_c00, ell_c01, ell_c11. All values
//! are written with Rust's shortest round-trip float formatting, so a
//! fixed record set always produces identical bytes.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::run::RunRecord;

const ELL_COLUMNS: [&str; 5] = ["ell_m0", "ell_m1", "ell_c00", "ell_c01", "ell_c11"];

/// Render records as CSV. All records must share one input dimension.
pub fn to_csv(records: &[RunRecord]) -> String {
    let input_dim = records.first().map_or(0, |r| r.input.len());
    let mut s = String::new();
    s.push_str("seed,iter,linf_error,logdet_model_err,delta,accepted");
    for i in 0..input_dim {
        let _ = write!(s, ",input_{i}");
    }
    for c in ELL_COLUMNS {
        let _ = write!(s, ",{c}");
    }
    s.push('\n');
    for r in records {
        debug_assert_eq!(r.input.len(), input_dim);
        let _ = write!(
            s,
            "{},{},{},{},{},{}",
            r.seed, r.iter, r.linf_error, r.logdet_model_err, r.delta, r.accepted
        );
        for v in &r.input {
            let _ = write!(s, ",{v}");
        }
        for v in r.ell_mean.iter().chain(r.ell_cov.iter()) {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

/// Parse a records CSV produced by [`to_csv`].
pub fn from_csv(text: &str) -> Result<Vec<RunRecord>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::RecordsParse("empty file".to_string()))?;
    let columns: Vec<&str> = header.split(',').collect();
    let col = |name: &str| -> Result<usize> {
        columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::RecordsParse(format!("missing column {name}")))
    };
    let seed_c = col("seed")?;
    let iter_c = col("iter")?;
    let linf_c = col("linf_error")?;
    let logdet_c = col("logdet_model_err")?;
    let delta_c = col("delta")?;
    let accepted_c = col("accepted")?;
    let input_cols: Vec<usize> = (0..)
        .map_while(|i| columns.iter().position(|c| *c == format!("input_{i}")))
        .collect();
    let ell_cols: Vec<usize> = ELL_COLUMNS
        .iter()
        .map(|name| col(name))
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse_f = |idx: usize| -> Result<f64> {
            fields
                .get(idx)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::RecordsParse(format!("bad float on line {}", lineno + 2)))
        };
        let parse_u = |idx: usize| -> Result<u64> {
            fields
                .get(idx)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::RecordsParse(format!("bad integer on line {}", lineno + 2)))
        };
        let mut input = Vec::with_capacity(input_cols.len());
        for &c in &input_cols {
            input.push(parse_f(c)?);
        }
        records.push(RunRecord {
            seed: parse_u(seed_c)?,
            iter: parse_u(iter_c)? as usize,
            linf_error: parse_f(linf_c)?,
            logdet_model_err: parse_f(logdet_c)?,
            delta: parse_f(delta_c)?,
            accepted: parse_u(accepted_c)? as usize,
            input,
            ell_mean: [parse_f(ell_cols[0])?, parse_f(ell_cols[1])?],
            ell_cov: [
                parse_f(ell_cols[2])?,
                parse_f(ell_cols[3])?,
                parse_f(ell_cols[4])?,
            ],
        });
    }
    Ok(records)
}

/// Render the wall-clock sidecar (`timings.csv`); kept out of records.csv
/// so that file stays deterministic.
pub fn timings_to_csv(timings: &[(u64, usize, u128)]) -> String {
    let mut s = String::from("seed,iter,wall_ms\n");
    for (seed, iter, ms) in timings {
        let _ = writeln!(s, "{seed},{iter},{ms}");
    }
    s
}
