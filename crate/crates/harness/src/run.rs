//! End-to-end experiment execution: seeded initialization, the outer
//! algorithm loop (estimate → design → query → append), and per-iteration
//! metric rows.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use sysid_core::design::{design_input, InformationObjective};
use sysid_core::estimator::{estimation_loop, CalibrationState, GaussianBelief};
use sysid_core::linalg::{logdet_psd, spd_inverse};
use sysid_core::model::Dataset;
use sysid_core::{posterior_information, BenchmarkCase, Constraint};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

/// One metrics row per (seed, iteration). `linf_error` is NaN for cases
/// without a true parameter vector. The `ell_*` fields carry the 2-D slice
/// of the posterior estimate (mean and covariance sub-block) used by the
/// trajectory plots.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    /// 1-based outer iteration; the dataset holds n0 + iter points after it.
    pub iter: usize,
    pub linf_error: f64,
    pub logdet_model_err: f64,
    pub delta: f64,
    /// Accepted passes of the inner loop at this iteration.
    pub accepted: usize,
    /// The chosen designable input.
    pub input: Vec<f64>,
    pub ell_mean: [f64; 2],
    /// Posterior covariance sub-block (c00, c01, c11).
    pub ell_cov: [f64; 3],
}

/// Everything a finished experiment produces. Records are ordered by
/// (seed, iter) and deterministic for a fixed config; timings are wall
/// clock and kept separate so the records stay byte-reproducible.
#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    /// Seeds that aborted, with the error message. Completed iterations of
    /// a failed seed keep their rows.
    pub failures: Vec<(u64, String)>,
    /// (seed, iter, milliseconds) per outer iteration.
    pub timings_ms: Vec<(u64, usize, u128)>,
}

/// State threaded through the outer iterations of one run.
#[derive(Debug, Clone)]
pub struct RunState {
    pub dataset: Dataset,
    pub theta: DVector<f64>,
    pub calibration: CalibrationState,
    pub prior: GaussianBelief,
}

/// Outcome of one outer algorithm call.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// Accepted passes of the inner loop.
    pub accepted: usize,
    /// The designable part of the appended input.
    pub designed: DVector<f64>,
}

/// One outer call of the identification algorithm: improve the estimate on
/// the current data, design the next input using Σ_model_error, query the
/// oracle, and append the new pair.
pub fn run_algorithm1_step<R: Rng + ?Sized>(
    case: &BenchmarkCase,
    state: &mut RunState,
    config: &ExperimentConfig,
    rng: &mut R,
) -> Result<StepOutcome> {
    assert!(!state.dataset.is_empty(), "dataset must be non-empty");

    let outcome = estimation_loop(
        &state.dataset,
        &case.family,
        &state.theta,
        &state.calibration,
        &state.prior,
        config.inner_iters,
        config.rho,
        config.delta_shrink,
    )?;
    // A no-accept loop still designs the next input with the prior θ̂.
    state.theta = outcome.theta;
    state.calibration = outcome.state;

    let objective = InformationObjective::for_dataset(
        &state.dataset,
        &case.family,
        &state.theta,
        &state.calibration.sigma_model_error,
        state.prior.precision().clone(),
        config.measure()?,
        config.lambda,
        case.input_constraint.clone(),
        Constraint::Unbounded,
    )?;
    let designed = design_input(
        &objective,
        &state.theta,
        &case.family,
        &state.dataset,
        config.design_starts,
        rng,
    )?;

    let context = state.dataset.next_context();
    let x = state.dataset.assemble_input(&designed, &context);
    let y = case.oracle.query(&x)?;
    state.dataset.push(x, y)?;

    Ok(StepOutcome {
        accepted: outcome.accepted_passes,
        designed,
    })
}

/// The shared fixed initial dataset: n0 points drawn once from the master
/// rng stream. Stateless cases sample the input set directly; the unicycle
/// uses one-step rollouts from the origin with uniform controls.
pub fn initial_dataset(case: &BenchmarkCase, config: &ExperimentConfig) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(0);
    let mut dataset = case.empty_dataset();
    let d_design = dataset.designable_dim();
    for _ in 0..config.n0 {
        let designed = case.input_constraint.sample(d_design, &mut rng);
        let context = match case.sequential {
            true => DVector::zeros(case.oracle.output_dim()),
            false => DVector::zeros(0),
        };
        let x = dataset.assemble_input(&designed, &context);
        let y = case.oracle.query(&x)?;
        dataset.push(x, y)?;
    }
    Ok(dataset)
}

/// Draw the per-seed initialization: θ_prior standard normal, Σ_prior = s·I
/// with s ~ U[prior range], initial Σ = v·I with v ~ U[sigma range]. The
/// initial estimate is the prior mean.
fn seeded_run_state(
    case: &BenchmarkCase,
    config: &ExperimentConfig,
    dataset: Dataset,
    seed: u64,
) -> Result<RunState> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(1 + seed);
    let d_theta = case.family.param_dim();
    let theta_prior = DVector::from_fn(d_theta, |_, _| StandardNormal.sample(&mut rng));
    let prior_scale = rng.random_range(config.prior_scale_min..=config.prior_scale_max);
    let sigma_scale = rng.random_range(config.sigma_scale_min..=config.sigma_scale_max);
    let d_y = case.oracle.output_dim();
    let prior = GaussianBelief::isotropic(theta_prior.clone(), prior_scale);
    let calibration =
        CalibrationState::new(DMatrix::identity(d_y, d_y) * sigma_scale, config.delta0)?;
    Ok(RunState {
        dataset,
        theta: theta_prior,
        calibration,
        prior,
    })
}

fn record_for(
    case: &BenchmarkCase,
    state: &RunState,
    seed: u64,
    iter: usize,
    step: &StepOutcome,
) -> Result<RunRecord> {
    let linf_error = match &case.theta_true {
        Some(truth) => (&state.theta - truth).amax(),
        None => f64::NAN,
    };
    let logdet_model_err = logdet_psd(&state.calibration.sigma_model_error, "sigma_model_error")?;

    // Posterior covariance slice for the trajectory/ellipse plots. The
    // appended point is already in the dataset.
    let inputs: Vec<DVector<f64>> = state.dataset.inputs().cloned().collect();
    let info = posterior_information(
        &inputs,
        &state.theta,
        &case.family,
        &state.calibration.sigma,
        state.prior.precision(),
    )?;
    let cov = spd_inverse(&info, "posterior information")?;

    Ok(RunRecord {
        seed,
        iter,
        linf_error,
        logdet_model_err,
        delta: state.calibration.delta,
        accepted: step.accepted,
        input: step.designed.iter().copied().collect(),
        ell_mean: [state.theta[0], state.theta[1]],
        ell_cov: [cov[(0, 0)], cov[(0, 1)], cov[(1, 1)]],
    })
}

#[derive(Debug, Default)]
struct SeedOutcome {
    records: Vec<RunRecord>,
    timings: Vec<(u64, usize, u128)>,
    failure: Option<String>,
}

/// Run one seed, keeping the rows of completed iterations when a later
/// iteration fails.
fn run_seed(
    case: &BenchmarkCase,
    config: &ExperimentConfig,
    dataset: Dataset,
    seed: u64,
) -> SeedOutcome {
    let mut state = match seeded_run_state(case, config, dataset, seed) {
        Ok(s) => s,
        Err(e) => {
            return SeedOutcome {
                failure: Some(e.to_string()),
                ..SeedOutcome::default()
            }
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(1 + config.seeds + seed);

    let mut out = SeedOutcome::default();
    for iter in 1..=config.iterations {
        let started = Instant::now();
        let step_result = run_algorithm1_step(case, &mut state, config, &mut rng)
            .and_then(|step| record_for(case, &state, seed, iter, &step));
        match step_result {
            Ok(record) => {
                out.records.push(record);
                out.timings
                    .push((seed, iter, started.elapsed().as_millis()));
            }
            Err(e) => {
                out.failure = Some(format!("iteration {iter}: {e}"));
                return out;
            }
        }
        debug_assert_eq!(state.dataset.len(), config.n0 + iter);
    }
    out
}

/// Look the configured case up and apply config-level overrides (the
/// Hénon-map input bound is a harness default, not part of the map).
pub fn configured_case(config: &ExperimentConfig) -> Result<BenchmarkCase> {
    let mut case = BenchmarkCase::by_name(&config.case)
        .ok_or_else(|| Error::UnknownCase(config.case.clone()))?;
    if matches!(config.case.as_str(), "henon" | "mismatch-tied" | "mismatch-linear") {
        case.input_constraint = Constraint::norm_ball(config.henon_input_radius);
    }
    Ok(case)
}

/// Run all seeds of the configured experiment. Seeds execute on a worker
/// pool; per-seed rng streams make the records independent of scheduling.
/// A failing seed is recorded and the run continues.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let case = configured_case(config)?;
    let dataset = initial_dataset(&case, config)?;

    let per_seed: Vec<_> = (0..config.seeds)
        .into_par_iter()
        .map(|seed| (seed, run_seed(&case, config, dataset.clone(), seed)))
        .collect();

    let mut out = ExperimentOutput::default();
    for (seed, seed_out) in per_seed {
        out.records.extend(seed_out.records);
        out.timings_ms.extend(seed_out.timings);
        if let Some(message) = seed_out.failure {
            out.failures.push((seed, message));
        }
    }
    Ok(out)
}
