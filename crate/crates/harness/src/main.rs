//! `sysid` command-line interface.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use sysid_harness::{config::ExperimentConfig, output, plot, records, summary, verdict};

#[derive(Parser)]
#[command(
    name = "sysid",
    version,
    about = "Active system identification experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark case and write records, summary, and manifest.
    Run {
        /// Benchmark case: linear, henon, unicycle, mismatch-tied,
        /// mismatch-linear.
        #[arg(long)]
        case: String,
        /// Optional key = value config file; defaults otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render SVG plots from a run directory.
    Plot {
        /// Directory containing records.csv.
        #[arg(long = "in")]
        input: PathBuf,
        /// Directory to write SVG files into.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the model-family adequacy verdict for a run directory.
    Verdict {
        /// Directory containing records.csv.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Configuration helpers.
    Config {
        /// Print the default configuration in config-file format.
        #[arg(long)]
        defaults: bool,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run { case, config, out } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::load(&path)
                    .with_context(|| format!("loading config {}", path.display()))?,
                None => ExperimentConfig::default(),
            };
            cfg.case = case;
            cfg.validate()?;

            let started_unix = output::now_unix_s();
            let clock = Instant::now();
            let result = sysid_harness::run_experiment(&cfg)?;
            let elapsed = clock.elapsed();
            output::write_run(&out, &cfg, &result, started_unix, elapsed.as_millis())?;

            println!(
                "case {}: {} seeds x {} iterations in {:.2}s -> {}",
                cfg.case,
                cfg.seeds,
                cfg.iterations,
                elapsed.as_secs_f64(),
                out.display()
            );
            if !result.failures.is_empty() {
                for (seed, err) in &result.failures {
                    eprintln!("seed {seed} failed: {err}");
                }
                bail!("{} seed(s) failed", result.failures.len());
            }
        }
        Command::Plot { input, out } => {
            let text = std::fs::read_to_string(input.join("records.csv"))
                .with_context(|| format!("reading {}/records.csv", input.display()))?;
            let recs = records::from_csv(&text)?;
            let rows = summary::summarize(&recs)?;
            std::fs::create_dir_all(&out)?;
            let write = |name: &str, body: String| -> anyhow::Result<()> {
                let path = out.join(name);
                std::fs::write(&path, body)
                    .with_context(|| format!("writing {}", path.display()))?;
                println!("wrote {}", path.display());
                Ok(())
            };
            write(
                "error_mean.svg",
                plot::mean_band_plot(
                    "Parameter estimate error (mean ± 1 std)",
                    "max-norm error",
                    &rows,
                    |r| (r.mean_linf, r.std_linf),
                ),
            )?;
            write(
                "logdet_model_error.svg",
                plot::mean_band_plot(
                    "log det of model-error covariance (mean ± 1 std)",
                    "log det",
                    &rows,
                    |r| (r.mean_logdet, r.std_logdet),
                ),
            )?;
            write(
                "inputs.svg",
                plot::inputs_plot("Designed inputs (seed 0)", &recs, 0),
            )?;
            write(
                "estimate_trajectory.svg",
                plot::trajectory_plot(
                    "Estimate trajectory with 1-sigma ellipses (seed 0)",
                    &recs,
                    0,
                ),
            )?;
        }
        Command::Verdict { input } => {
            let text = std::fs::read_to_string(input.join("records.csv"))
                .with_context(|| format!("reading {}/records.csv", input.display()))?;
            let recs = records::from_csv(&text)?;
            println!("{}", verdict::mismatch_verdict(&recs)?);
        }
        Command::Config { defaults } => {
            if defaults {
                print!("{}", ExperimentConfig::default().to_config_text());
            } else {
                bail!("nothing to do: pass --defaults");
            }
        }
    }
    Ok(())
}
