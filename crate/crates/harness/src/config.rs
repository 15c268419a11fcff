//! Experiment configuration: defaults, the key-value config file format,
//! and validation.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sysid_core::Measure;

use crate::error::{Error, Result};

/// A seeded experiment description. Every field can be overridden from a
/// `key = value` config file; `sysid config --defaults` prints the default
/// set in that format.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    /// Benchmark case name.
    pub case: String,
    /// Number of independent initializations of Σ, θ_prior, Σ_prior.
    pub seeds: u64,
    /// Outer algorithm calls (each appends one data point).
    pub iterations: usize,
    /// Passes of the inner estimate-improvement loop per call.
    pub inner_iters: usize,
    /// Initial trust radius δ.
    pub delta0: f64,
    /// Multiplier applied to δ on rejected passes.
    pub delta_shrink: f64,
    /// Acceptance ratio: reject when mean ‖ε_lin‖ > ρ · mean ‖ε_model‖.
    pub rho: f64,
    /// Constraint penalty weight for input design.
    pub lambda: f64,
    /// Magnitude measure: log-det, trace, or min-eig.
    pub measure: String,
    /// Fixed initial data points.
    pub n0: usize,
    /// Multi-start count for the design ascent.
    pub design_starts: usize,
    /// Master seed: stream 0 draws the shared initial dataset, stream
    /// 1 + k drives the k-th initialization.
    pub rng_seed: u64,
    /// Σ_prior = s·I with s uniform in [prior_scale_min, prior_scale_max].
    pub prior_scale_min: f64,
    pub prior_scale_max: f64,
    /// Initial Σ = v·I with v uniform in [sigma_scale_min, sigma_scale_max].
    pub sigma_scale_min: f64,
    pub sigma_scale_max: f64,
    /// Input norm bound applied to the Hénon-map cases (the map itself is
    /// unconstrained; this keeps its quadratic term well scaled).
    pub henon_input_radius: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            case: "linear".to_string(),
            seeds: 30,
            iterations: 30,
            inner_iters: 10,
            delta0: 0.3,
            delta_shrink: 0.8,
            rho: 0.5,
            lambda: 100.0,
            measure: "log-det".to_string(),
            n0: 5,
            design_starts: 8,
            rng_seed: 0,
            prior_scale_min: 0.5,
            prior_scale_max: 5.0,
            sigma_scale_min: 0.1,
            sigma_scale_max: 1.0,
            henon_input_radius: sysid_core::bench::HENON_INPUT_RADIUS,
        }
    }
}

impl ExperimentConfig {
    /// Parse the declarative `key = value` format. Unknown keys are
    /// errors; omitted keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::ConfigParse {
                line: idx + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected 'key = value'".to_string()))?;
            let key = key.trim();
            let value = value.trim();
            macro_rules! num {
                () => {
                    value
                        .parse()
                        .map_err(|e| err(format!("bad value for {key}: {e}")))?
                };
            }
            match key {
                "case" => cfg.case = value.to_string(),
                "seeds" => cfg.seeds = num!(),
                "iterations" => cfg.iterations = num!(),
                "inner_iters" => cfg.inner_iters = num!(),
                "delta0" => cfg.delta0 = num!(),
                "delta_shrink" => cfg.delta_shrink = num!(),
                "rho" => cfg.rho = num!(),
                "lambda" => cfg.lambda = num!(),
                "measure" => cfg.measure = value.to_string(),
                "n0" => cfg.n0 = num!(),
                "design_starts" => cfg.design_starts = num!(),
                "rng_seed" => cfg.rng_seed = num!(),
                "prior_scale_min" => cfg.prior_scale_min = num!(),
                "prior_scale_max" => cfg.prior_scale_max = num!(),
                "sigma_scale_min" => cfg.sigma_scale_min = num!(),
                "sigma_scale_max" => cfg.sigma_scale_max = num!(),
                "henon_input_radius" => cfg.henon_input_radius = num!(),
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Render in the config file format.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "case = {}", self.case);
        let _ = writeln!(s, "seeds = {}", self.seeds);
        let _ = writeln!(s, "iterations = {}", self.iterations);
        let _ = writeln!(s, "inner_iters = {}", self.inner_iters);
        let _ = writeln!(s, "delta0 = {}", self.delta0);
        let _ = writeln!(s, "delta_shrink = {}", self.delta_shrink);
        let _ = writeln!(s, "rho = {}", self.rho);
        let _ = writeln!(s, "lambda = {}", self.lambda);
        let _ = writeln!(s, "measure = {}", self.measure);
        let _ = writeln!(s, "n0 = {}", self.n0);
        let _ = writeln!(s, "design_starts = {}", self.design_starts);
        let _ = writeln!(s, "rng_seed = {}", self.rng_seed);
        let _ = writeln!(s, "prior_scale_min = {}", self.prior_scale_min);
        let _ = writeln!(s, "prior_scale_max = {}", self.prior_scale_max);
        let _ = writeln!(s, "sigma_scale_min = {}", self.sigma_scale_min);
        let _ = writeln!(s, "sigma_scale_max = {}", self.sigma_scale_max);
        let _ = writeln!(s, "henon_input_radius = {}", self.henon_input_radius);
        s
    }

    pub fn measure(&self) -> Result<Measure> {
        self.measure
            .parse::<Measure>()
            .map_err(|message| Error::ConfigParse { line: 0, message })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |message: &str| Error::ConfigParse {
            line: 0,
            message: message.to_string(),
        };
        if self.seeds == 0 || self.iterations == 0 || self.inner_iters == 0 {
            return Err(bad("seeds, iterations, and inner_iters must be positive"));
        }
        if self.n0 == 0 || self.design_starts == 0 {
            return Err(bad("n0 and design_starts must be positive"));
        }
        if self.delta0 <= 0.0 {
            return Err(bad("delta0 must be positive"));
        }
        if !(0.0 < self.delta_shrink && self.delta_shrink <= 1.0) {
            return Err(bad("delta_shrink must be in (0, 1]"));
        }
        if self.rho <= 0.0 || self.lambda < 0.0 {
            return Err(bad("rho must be positive, lambda non-negative"));
        }
        if self.prior_scale_min <= 0.0 || self.prior_scale_max < self.prior_scale_min {
            return Err(bad("prior scale range must be positive and ordered"));
        }
        if self.sigma_scale_min <= 0.0 || self.sigma_scale_max < self.sigma_scale_min {
            return Err(bad("sigma scale range must be positive and ordered"));
        }
        if self.henon_input_radius <= 0.0 {
            return Err(bad("henon_input_radius must be positive"));
        }
        self.measure()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_config_text() {
        let cfg = ExperimentConfig::default();
        let parsed = ExperimentConfig::parse(&cfg.to_config_text()).unwrap();
        assert_eq!(cfg, parsed);
    }

    #[test]
    fn parse_overrides_and_comments() {
        let cfg = ExperimentConfig::parse(
            "# comment\ncase = henon\nseeds = 3\n\nrng_seed = 42\nmeasure = trace\n",
        )
        .unwrap();
        assert_eq!(cfg.case, "henon");
        assert_eq!(cfg.seeds, 3);
        assert_eq!(cfg.rng_seed, 42);
        assert_eq!(cfg.measure().unwrap(), Measure::Trace);
        assert_eq!(cfg.iterations, 30);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = ExperimentConfig::parse("bogus = 1\n");
        assert!(matches!(err, Err(Error::ConfigParse { line: 1, .. })));
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(ExperimentConfig::parse("delta0 = 0\n").is_err());
        assert!(ExperimentConfig::parse("measure = bogus\n").is_err());
        assert!(ExperimentConfig::parse("delta_shrink = 1.5\n").is_err());
    }
}
