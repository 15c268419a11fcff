//! Writing a finished run to an output directory: records.csv,
//! summary.csv, timings.csv, and the meta.json run manifest.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::run::ExperimentOutput;
use crate::{records, summary};

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    config: &'a ExperimentConfig,
    version: &'static str,
    started_unix_s: u64,
    elapsed_ms: u128,
    failures: Vec<FailureEntry<'a>>,
}

#[derive(Debug, Serialize)]
struct FailureEntry<'a> {
    seed: u64,
    error: &'a str,
}

/// Write records.csv, summary.csv, timings.csv, and meta.json into `dir`.
pub fn write_run(
    dir: &Path,
    config: &ExperimentConfig,
    output: &ExperimentOutput,
    started_unix_s: u64,
    elapsed_ms: u128,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("records.csv"), records::to_csv(&output.records))?;
    if !output.records.is_empty() {
        let rows = summary::summarize(&output.records)?;
        std::fs::write(dir.join("summary.csv"), summary::to_csv(&rows))?;
    }
    std::fs::write(
        dir.join("timings.csv"),
        records::timings_to_csv(&output.timings_ms),
    )?;
    let manifest = Manifest {
        config,
        version: env!("CARGO_PKG_VERSION"),
        started_unix_s,
        elapsed_ms,
        failures: output
            .failures
            .iter()
            .map(|(seed, error)| FailureEntry { seed: *seed, error })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(dir.join("meta.json"), json + "\n")?;
    Ok(())
}

pub fn now_unix_s() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
