//! Trust-region linearized-MAP parameter updates with online covariance
//! calibration.
//!
//! One estimation pass linearizes the model family at the current estimate,
//! solves the resulting norm-constrained convex quadratic for a candidate
//! estimate, and then splits the realized residuals into model error (truth
//! vs model) and linearization error (model vs its Taylor expansion). The
//! candidate is accepted only while linearization error stays subordinate to
//! model error; otherwise the trust radius shrinks and the pass is retried.

mod trust_region;

pub use trust_region::{solve_trust_region_step, TrustRegionStep};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, min_eigenvalue, second_moment, spd_inverse, symmetrize};
use crate::model::{linearize_dataset, Dataset, Linearization, ParametricModel};

/// Gaussian prior/posterior belief over the parameter vector, stored as a
/// mean and a precision matrix so the uniform prior (zero precision) is
/// representable exactly.
#[derive(Debug, Clone)]
pub struct GaussianBelief {
    mean: DVector<f64>,
    precision: DMatrix<f64>,
}

impl GaussianBelief {
    /// Belief with an explicit precision matrix (symmetric PSD).
    pub fn new(mean: DVector<f64>, precision: DMatrix<f64>) -> Result<Self> {
        if precision.nrows() != mean.len() || precision.ncols() != mean.len() {
            return Err(Error::Dimension {
                what: "prior precision",
                expected: mean.len(),
                got: precision.nrows(),
            });
        }
        if asymmetry(&precision) > 1e-12 {
            return Err(Error::NotPositiveDefinite {
                what: "prior precision (asymmetric)",
            });
        }
        if min_eigenvalue(&precision) < -1e-10 {
            return Err(Error::NotPositiveDefinite {
                what: "prior precision",
            });
        }
        Ok(Self {
            mean,
            precision: symmetrize(&precision),
        })
    }

    /// Uniform (improper) prior: zero precision.
    pub fn uniform(dim: usize) -> Self {
        Self {
            mean: DVector::zeros(dim),
            precision: DMatrix::zeros(dim, dim),
        }
    }

    /// Isotropic Gaussian prior N(mean, variance·I).
    pub fn isotropic(mean: DVector<f64>, variance: f64) -> Self {
        assert!(variance > 0.0);
        let dim = mean.len();
        Self {
            mean,
            precision: DMatrix::identity(dim, dim) / variance,
        }
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }
}

/// Calibration state threaded through successive algorithm calls: the noise
/// covariance Σ, the model-error covariance, and the trust radius δ.
#[derive(Debug, Clone)]
pub struct CalibrationState {
    /// Noise covariance Σ of the linear Gaussian model (positive definite).
    pub sigma: DMatrix<f64>,
    /// Covariance of the model-error residuals alone (PSD).
    pub sigma_model_error: DMatrix<f64>,
    /// Trust radius δ > 0.
    pub delta: f64,
}

impl CalibrationState {
    /// Initial state with Σ_model_error = Σ (no fit performed yet).
    pub fn new(sigma: DMatrix<f64>, delta: f64) -> Result<Self> {
        assert!(delta > 0.0, "trust radius must be positive");
        // Validate PD once up front.
        crate::linalg::jittered_cholesky(&sigma, "initial sigma")?;
        Ok(Self {
            sigma_model_error: sigma.clone(),
            sigma,
            delta,
        })
    }
}

/// Residuals of one candidate estimate on the current dataset.
#[derive(Debug, Clone)]
pub struct Residuals {
    /// ε_model_i = y_i − f(x_i; θ̂₊): truth vs model.
    pub model_errors: Vec<DVector<f64>>,
    /// ε_lin_i = f(x_i; θ̂₊) − (b_i + C_i θ̂₊): model vs its expansion.
    pub lin_errors: Vec<DVector<f64>>,
}

impl Residuals {
    pub fn len(&self) -> usize {
        self.model_errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.model_errors.is_empty()
    }

    /// Mean Euclidean norm of the model errors.
    pub fn mean_model_norm(&self) -> f64 {
        mean_norm(&self.model_errors)
    }

    /// Mean Euclidean norm of the linearization errors.
    pub fn mean_lin_norm(&self) -> f64 {
        mean_norm(&self.lin_errors)
    }
}

fn mean_norm(vs: &[DVector<f64>]) -> f64 {
    if vs.is_empty() {
        return 0.0;
    }
    vs.iter().map(|v| v.norm()).sum::<f64>() / vs.len() as f64
}

/// Linearization errors at or below this size are floating-point noise and
/// never grounds for rejecting a pass.
const LIN_ERROR_FLOOR: f64 = 1e-12;

/// One trust-region MAP update: minimize the linearized negative log
/// posterior subject to ‖θ − θ̂‖ ≤ δ.
///
/// The quadratic is assembled as H = Σ_prior⁻¹ + Σᵢ CᵢᵀΣ⁻¹Cᵢ and
/// g = Σ_prior⁻¹ θ_prior + Σᵢ CᵢᵀΣ⁻¹(yᵢ − bᵢ), then handed to the
/// norm-constrained solver.
pub fn map_step(
    dataset: &Dataset,
    model: &ParametricModel,
    theta_hat: &DVector<f64>,
    sigma: &DMatrix<f64>,
    prior: &GaussianBelief,
    delta: f64,
) -> Result<DVector<f64>> {
    let lins = linearize_dataset(model, dataset, theta_hat)?;
    let (h, g) = assemble_map_quadratic(dataset, &lins, sigma, prior)?;
    Ok(solve_trust_region_step(&h, &g, theta_hat, delta)?.theta)
}

/// Build (H, g) of the linearized MAP objective ½θᵀHθ − gᵀθ + const.
pub fn assemble_map_quadratic(
    dataset: &Dataset,
    linearizations: &[Linearization],
    sigma: &DMatrix<f64>,
    prior: &GaussianBelief,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let sigma_inv = spd_inverse(sigma, "sigma")?;
    let d_theta = prior.mean().len();
    let mut h = prior.precision().clone();
    let mut g = prior.precision() * prior.mean();
    for ((_, y), lin) in dataset.points().iter().zip(linearizations) {
        let ct_sinv = lin.c.transpose() * &sigma_inv;
        h += &ct_sinv * &lin.c;
        g += &ct_sinv * (y - &lin.b);
    }
    debug_assert_eq!(h.nrows(), d_theta);
    Ok((symmetrize(&h), g))
}

/// Split the residuals of a candidate estimate into model error and
/// linearization error. The linearizations must be the ones taken at the
/// previous estimate θ̂ used inside the MAP step.
pub fn compute_residuals(
    dataset: &Dataset,
    model: &ParametricModel,
    theta_plus: &DVector<f64>,
    linearizations: &[Linearization],
) -> Result<Residuals> {
    let mut model_errors = Vec::with_capacity(dataset.len());
    let mut lin_errors = Vec::with_capacity(dataset.len());
    for ((x, y), lin) in dataset.points().iter().zip(linearizations) {
        let f = model.eval(x, theta_plus)?;
        model_errors.push(y - &f);
        lin_errors.push(&f - lin.predict(theta_plus));
    }
    Ok(Residuals {
        model_errors,
        lin_errors,
    })
}

/// Noise covariance from the combined residuals:
/// Σ = (1/n) Σᵢ (ε_model + ε_lin)(ε_model + ε_lin)ᵀ + jitter·I.
pub fn update_sigma(residuals: &Residuals) -> DMatrix<f64> {
    let combined: Vec<DVector<f64>> = residuals
        .model_errors
        .iter()
        .zip(&residuals.lin_errors)
        .map(|(m, l)| m + l)
        .collect();
    let dim = combined.first().map_or(0, |v| v.len());
    second_moment(&combined, dim)
}

/// Model-error covariance from ε_model alone, same jitter policy.
pub fn model_error_covariance(residuals: &Residuals) -> DMatrix<f64> {
    let dim = residuals.model_errors.first().map_or(0, |v| v.len());
    second_moment(&residuals.model_errors, dim)
}

/// Whether a candidate passes the acceptance test: linearization error must
/// stay below `rho` times the model error (plus a round-off floor).
pub fn passes_acceptance(residuals: &Residuals, rho: f64) -> bool {
    let lin = residuals.mean_lin_norm();
    lin <= rho * residuals.mean_model_norm() + LIN_ERROR_FLOOR
}

/// Outcome of an estimation loop.
#[derive(Debug, Clone)]
pub struct EstimationOutcome {
    /// Final accepted estimate (the input estimate if nothing was accepted).
    pub theta: DVector<f64>,
    /// Updated calibration state (δ may have shrunk; Σ and Σ_model_error
    /// reflect the last accepted pass).
    pub state: CalibrationState,
    /// Number of accepted passes.
    pub accepted_passes: usize,
    /// True when every pass was rejected.
    pub no_accept: bool,
}

/// The inner estimate-improvement loop: repeat the MAP step up to `iters`
/// times, shrinking δ by `delta_shrink` on rejected passes and recalibrating
/// Σ and Σ_model_error on accepted ones.
///
/// Exits early once an accepted step moves the estimate by less than 1e-10.
#[allow(clippy::too_many_arguments)]
pub fn estimation_loop(
    dataset: &Dataset,
    model: &ParametricModel,
    theta_hat: &DVector<f64>,
    state: &CalibrationState,
    prior: &GaussianBelief,
    iters: usize,
    rho: f64,
    delta_shrink: f64,
) -> Result<EstimationOutcome> {
    assert!(iters >= 1, "estimation loop needs at least one pass");
    assert!((0.0..1.0).contains(&delta_shrink) || delta_shrink == 1.0);

    let mut theta = theta_hat.clone();
    let mut state = state.clone();
    let mut accepted_passes = 0;

    for _ in 0..iters {
        let lins = linearize_dataset(model, dataset, &theta)?;
        let (h, g) = assemble_map_quadratic(dataset, &lins, &state.sigma, prior)?;
        let candidate = solve_trust_region_step(&h, &g, &theta, state.delta)?.theta;
        let residuals = compute_residuals(dataset, model, &candidate, &lins)?;

        if passes_acceptance(&residuals, rho) {
            state.sigma = update_sigma(&residuals);
            state.sigma_model_error = model_error_covariance(&residuals);
            let step_size = (&candidate - &theta).norm();
            theta = candidate;
            accepted_passes += 1;
            if step_size < 1e-10 {
                break;
            }
        } else {
            // Rejected: only δ changes.
            state.delta *= delta_shrink;
        }
    }

    Ok(EstimationOutcome {
        theta,
        no_accept: accepted_passes == 0,
        state,
        accepted_passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::linearize;

    fn scalar_linear_model() -> ParametricModel {
        // f(x; θ) = θ·x, scalar everything.
        ParametricModel::new(1, |x, t| DVector::from_vec(vec![t[0] * x[0]]))
            .with_jacobian(|x, _| DMatrix::from_element(1, 1, x[0]))
    }

    fn scalar_dataset(points: &[(f64, f64)]) -> Dataset {
        let mut ds = Dataset::stateless(1, 1);
        for &(x, y) in points {
            ds.push(DVector::from_vec(vec![x]), DVector::from_vec(vec![y]))
                .unwrap();
        }
        ds
    }

    #[test]
    fn map_step_unconstrained_least_squares() {
        let ds = scalar_dataset(&[(1.0, 2.0)]);
        let model = scalar_linear_model();
        let theta = map_step(
            &ds,
            &model,
            &DVector::zeros(1),
            &DMatrix::from_element(1, 1, 1.0),
            &GaussianBelief::uniform(1),
            10.0,
        )
        .unwrap();
        assert!((theta[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn map_step_clips_to_trust_boundary() {
        let ds = scalar_dataset(&[(1.0, 2.0)]);
        let model = scalar_linear_model();
        let theta = map_step(
            &ds,
            &model,
            &DVector::zeros(1),
            &DMatrix::from_element(1, 1, 1.0),
            &GaussianBelief::uniform(1),
            0.5,
        )
        .unwrap();
        assert!((theta[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn residual_split_is_zero_at_expansion_point() {
        let model = ParametricModel::new(2, |x, t| {
            DVector::from_vec(vec![1.0 - t[0] * x[0] * x[0] + x[1], t[1] * x[0]])
        });
        let mut ds = Dataset::stateless(2, 2);
        let x = DVector::from_vec(vec![0.4, 0.2]);
        let theta = DVector::from_vec(vec![1.4, 0.3]);
        let y = model.eval(&x, &theta).unwrap();
        ds.push(x.clone(), y).unwrap();

        let lins = vec![linearize(&model, &x, &theta).unwrap()];
        // θ̂₊ = θ̂ → ε_lin = 0 exactly.
        let res = compute_residuals(&ds, &model, &theta, &lins).unwrap();
        assert!(res.lin_errors[0].amax() < 1e-14);
        // Data generated at θ → ε_model = 0.
        assert!(res.model_errors[0].amax() < 1e-14);
    }

    #[test]
    fn linear_in_theta_has_zero_lin_error_everywhere() {
        let model = scalar_linear_model();
        let ds = scalar_dataset(&[(1.0, 2.0), (2.0, 4.0)]);
        let at = DVector::from_vec(vec![0.3]);
        let lins = linearize_dataset(&model, &ds, &at).unwrap();
        let far = DVector::from_vec(vec![-5.0]);
        let res = compute_residuals(&ds, &model, &far, &lins).unwrap();
        for l in &res.lin_errors {
            assert!(l.amax() < 1e-10);
        }
    }

    #[test]
    fn acceptance_rejects_comparable_lin_error() {
        // ε_lin = ε_model elementwise → mean norms equal → 1 > 0.5 rejects.
        let r = DVector::from_vec(vec![1.0, 0.0]);
        let residuals = Residuals {
            model_errors: vec![r.clone(), r.clone()],
            lin_errors: vec![r.clone(), r],
        };
        assert!(!passes_acceptance(&residuals, 0.5));
        assert!(passes_acceptance(&residuals, 1.0));
    }

    #[test]
    fn acceptance_ignores_roundoff_lin_error() {
        let residuals = Residuals {
            model_errors: vec![DVector::zeros(1)],
            lin_errors: vec![DVector::from_vec(vec![1e-15])],
        };
        assert!(passes_acceptance(&residuals, 0.5));
    }

    #[test]
    fn estimation_loop_accepts_linear_model_first_pass() {
        let ds = scalar_dataset(&[(1.0, 2.0), (2.0, 4.0), (0.5, 1.0)]);
        let model = scalar_linear_model();
        let state = CalibrationState::new(DMatrix::from_element(1, 1, 0.5), 10.0).unwrap();
        let out = estimation_loop(
            &ds,
            &model,
            &DVector::zeros(1),
            &state,
            &GaussianBelief::uniform(1),
            10,
            0.5,
            0.8,
        )
        .unwrap();
        assert!(!out.no_accept);
        assert!(out.accepted_passes >= 1);
        // Global least-squares fit is θ = 2; reached in the first accepted
        // pass since ε_lin ≡ 0 and the step fits inside δ.
        assert!((out.theta[0] - 2.0).abs() < 1e-8);
        // δ never shrank: linear model never rejects.
        assert!((out.state.delta - 10.0).abs() < 1e-12);
    }

    #[test]
    fn estimation_loop_shrinks_delta_on_strong_nonlinearity() {
        // f(x; θ) = exp(3θ)·x with data at θ = 1 and a start far away:
        // early candidates overshoot and must be rejected.
        let model =
            ParametricModel::new(1, |x, t| DVector::from_vec(vec![(3.0 * t[0]).exp() * x[0]]));
        let ds = scalar_dataset(&[(1.0, (3.0f64).exp())]);
        let state = CalibrationState::new(DMatrix::from_element(1, 1, 1.0), 3.0).unwrap();
        let out = estimation_loop(
            &ds,
            &model,
            &DVector::zeros(1),
            &state,
            &GaussianBelief::uniform(1),
            10,
            0.5,
            0.8,
        )
        .unwrap();
        assert!(out.state.delta < 3.0, "delta should have shrunk");
        assert!(out.theta[0] > 0.0, "estimate should move toward θ=1");
    }

    #[test]
    fn rejected_passes_leave_sigma_untouched() {
        let model =
            ParametricModel::new(1, |x, t| DVector::from_vec(vec![(3.0 * t[0]).exp() * x[0]]));
        let ds = scalar_dataset(&[(1.0, (3.0f64).exp())]);
        let sigma0 = DMatrix::from_element(1, 1, 1.0);
        let state = CalibrationState::new(sigma0.clone(), 3.0).unwrap();
        // One pass only: with δ = 3 the first candidate is rejected.
        let out = estimation_loop(
            &ds,
            &model,
            &DVector::zeros(1),
            &state,
            &GaussianBelief::uniform(1),
            1,
            0.5,
            0.8,
        )
        .unwrap();
        assert!(out.no_accept);
        assert_eq!(out.accepted_passes, 0);
        assert_eq!(out.theta[0], 0.0);
        assert_eq!(out.state.sigma, sigma0);
        assert_eq!(out.state.sigma_model_error, sigma0);
        assert!((out.state.delta - 2.4).abs() < 1e-12);
    }

    #[test]
    fn update_sigma_outer_products() {
        let residuals = Residuals {
            model_errors: vec![DVector::from_vec(vec![1.0, 0.0])],
            lin_errors: vec![DVector::zeros(2)],
        };
        let sigma = update_sigma(&residuals);
        assert!((sigma[(0, 0)] - 1.0).abs() < 1e-8);
        assert!(sigma[(1, 1)] > 0.0 && sigma[(1, 1)] < 1e-8);

        let me = model_error_covariance(&Residuals {
            model_errors: vec![DVector::from_vec(vec![2.0, 0.0])],
            lin_errors: vec![DVector::zeros(2)],
        });
        assert!((me[(0, 0)] - 4.0).abs() < 1e-8);
        assert!(me[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn map_step_rejects_non_pd_sigma() {
        let ds = scalar_dataset(&[(1.0, 2.0)]);
        let model = scalar_linear_model();
        let err = map_step(
            &ds,
            &model,
            &DVector::zeros(1),
            &DMatrix::from_element(1, 1, -1.0),
            &GaussianBelief::uniform(1),
            1.0,
        );
        assert!(matches!(err, Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn uniform_prior_is_zero_precision() {
        let prior = GaussianBelief::uniform(3);
        assert_eq!(prior.precision().amax(), 0.0);
    }

    #[test]
    fn belief_rejects_indefinite_precision() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(GaussianBelief::new(DVector::zeros(2), bad).is_err());
    }
}
