//! Experiment harness for the active system identification library:
//! seeded multi-run execution, CSV records, per-iteration summaries, the
//! model-adequacy verdict, and SVG plots.

pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod records;
pub mod run;
pub mod summary;
pub mod verdict;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use run::{run_experiment, ExperimentOutput, RunRecord};
pub use summary::{summarize, SummaryRow};
pub use verdict::{mismatch_verdict, Verdict};
