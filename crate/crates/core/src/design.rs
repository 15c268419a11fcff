//! Informative input design: maximize a scalar magnitude measure of the
//! approximate posterior information matrix over the next input, with
//! constraint sets handled by smooth squared-distance penalties and
//! projection.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{logdet_psd, min_eigenvalue, spd_inverse, symmetrize};
use crate::model::{linearize, Dataset, ParametricModel};

/// Scalar magnitude measure applied to the information matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Measure {
    /// log det (D-optimality).
    #[default]
    LogDet,
    /// trace (A-optimality on the inverse scale).
    Trace,
    /// smallest eigenvalue (E-optimality).
    MinEig,
}

impl Measure {
    /// Apply the measure to a symmetric PSD matrix.
    pub fn apply(&self, info: &DMatrix<f64>) -> Result<f64> {
        match self {
            Measure::LogDet => logdet_psd(info, "information matrix"),
            Measure::Trace => Ok(info.trace()),
            Measure::MinEig => {
                if info.nrows() == 0 {
                    return Err(Error::Dimension {
                        what: "information matrix for min-eig",
                        expected: 1,
                        got: 0,
                    });
                }
                Ok(min_eigenvalue(info))
            }
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "log-det" | "logdet" | "log_det" => Ok(Measure::LogDet),
            "trace" => Ok(Measure::Trace),
            "min-eig" | "mineig" | "min_eig" => Ok(Measure::MinEig),
            other => Err(format!("unknown measure '{other}'")),
        }
    }
}

/// Constraint set for inputs (on the designable slice) or outputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    Unbounded,
    /// Euclidean ball of the given radius around the origin.
    NormBall {
        radius: f64,
    },
    /// Axis-aligned box, elementwise lo < hi.
    Box {
        lo: DVector<f64>,
        hi: DVector<f64>,
    },
}

impl Constraint {
    pub fn norm_ball(radius: f64) -> Self {
        assert!(radius > 0.0);
        Constraint::NormBall { radius }
    }

    pub fn boxed(lo: DVector<f64>, hi: DVector<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(hi.iter()).all(|(l, h)| l < h));
        Constraint::Box { lo, hi }
    }

    /// Squared Euclidean distance to the set (0 inside).
    pub fn sqdist(&self, x: &DVector<f64>) -> f64 {
        match self {
            Constraint::Unbounded => 0.0,
            Constraint::NormBall { radius } => {
                let excess = (x.norm() - radius).max(0.0);
                excess * excess
            }
            Constraint::Box { lo, hi } => x
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let d = (lo[i] - v).max(0.0).max(v - hi[i]);
                    d * d
                })
                .sum(),
        }
    }

    /// Whether `x` lies in the set within `tol` (Euclidean distance).
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.sqdist(x) <= tol * tol
    }

    /// Euclidean projection onto the set (identity for `Unbounded`).
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Constraint::Unbounded => x.clone(),
            Constraint::NormBall { radius } => {
                let n = x.norm();
                if n <= *radius {
                    x.clone()
                } else {
                    x * (*radius / n)
                }
            }
            Constraint::Box { lo, hi } => {
                DVector::from_fn(x.len(), |i, _| x[i].clamp(lo[i], hi[i]))
            }
        }
    }

    /// Draw a point from the set: uniform for balls and boxes, standard
    /// normal for unbounded sets.
    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> DVector<f64> {
        match self {
            Constraint::Unbounded => DVector::from_fn(dim, |_, _| StandardNormal.sample(rng)),
            Constraint::NormBall { radius } => {
                // Direction uniform on the sphere, radius ~ r·u^(1/d).
                let dir = DVector::from_fn(dim, |_, _| {
                    let v: f64 = StandardNormal.sample(rng);
                    v
                });
                let n = dir.norm();
                let dir = if n > 0.0 {
                    dir / n
                } else {
                    DVector::from_element(dim, 1.0 / (dim as f64).sqrt())
                };
                let u: f64 = rng.random();
                dir * (*radius * u.powf(1.0 / dim as f64))
            }
            Constraint::Box { lo, hi } => {
                DVector::from_fn(dim, |i, _| rng.random_range(lo[i]..hi[i]))
            }
        }
    }
}

/// Everything needed to score a candidate next input.
#[derive(Debug, Clone)]
pub struct InformationObjective {
    /// Scalar magnitude measure (log det by default).
    pub measure: Measure,
    /// Prior precision Σ_prior⁻¹ (d_θ × d_θ PSD).
    pub prior_precision: DMatrix<f64>,
    /// Information accumulated from the existing inputs x_1..x_n.
    pub fixed_information: DMatrix<f64>,
    /// Inverse of the covariance in use (Σ_model_error for the algorithm's
    /// design phase).
    pub sigma_inv: DMatrix<f64>,
    /// Penalty weight λ ≥ 0.
    pub lambda: f64,
    /// Constraint set on the designable input slice.
    pub input_set: Constraint,
    /// Constraint set on the predicted output f(x; θ̂₊).
    pub output_set: Constraint,
}

impl InformationObjective {
    /// Build the objective for the next design step of a dataset: the fixed
    /// information is accumulated over the existing inputs with the given
    /// covariance.
    #[allow(clippy::too_many_arguments)]
    pub fn for_dataset(
        dataset: &Dataset,
        model: &ParametricModel,
        theta_plus: &DVector<f64>,
        sigma: &DMatrix<f64>,
        prior_precision: DMatrix<f64>,
        measure: Measure,
        lambda: f64,
        input_set: Constraint,
        output_set: Constraint,
    ) -> Result<Self> {
        let inputs: Vec<DVector<f64>> = dataset.inputs().cloned().collect();
        let fixed = information_sum(&inputs, theta_plus, model, sigma)?;
        Ok(Self {
            measure,
            prior_precision,
            fixed_information: fixed,
            sigma_inv: spd_inverse(sigma, "design sigma")?,
            lambda,
            input_set,
            output_set,
        })
    }
}

/// Posterior information matrix Σ_prior⁻¹ + Σᵢ C(xᵢ; θ̂₊)ᵀ Σ⁻¹ C(xᵢ; θ̂₊).
pub fn posterior_information(
    inputs: &[DVector<f64>],
    theta_plus: &DVector<f64>,
    model: &ParametricModel,
    sigma: &DMatrix<f64>,
    prior_precision: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let sum = information_sum(inputs, theta_plus, model, sigma)?;
    Ok(symmetrize(&(prior_precision + sum)))
}

fn information_sum(
    inputs: &[DVector<f64>],
    theta_plus: &DVector<f64>,
    model: &ParametricModel,
    sigma: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let sigma_inv = spd_inverse(sigma, "sigma")?;
    let d_theta = theta_plus.len();
    let mut info = DMatrix::<f64>::zeros(d_theta, d_theta);
    for x in inputs {
        let c = model.jacobian(x, theta_plus)?;
        info += c.transpose() * &sigma_inv * c;
    }
    Ok(symmetrize(&info))
}

/// Score a designable candidate: measure of the would-be posterior
/// information minus λ times the squared violation distances of the input
/// and the predicted output.
pub fn design_objective(
    candidate: &DVector<f64>,
    objective: &InformationObjective,
    theta_plus: &DVector<f64>,
    model: &ParametricModel,
    dataset: &Dataset,
    context: &DVector<f64>,
) -> Result<f64> {
    let x = dataset.assemble_input(candidate, context);
    let lin = linearize(model, &x, theta_plus)?;
    let info = symmetrize(
        &(&objective.prior_precision
            + &objective.fixed_information
            + lin.c.transpose() * &objective.sigma_inv * &lin.c),
    );
    let gain = objective.measure.apply(&info)?;
    let f = model.eval(&x, theta_plus)?;
    let penalty = objective.input_set.sqdist(candidate) + objective.output_set.sqdist(&f);
    Ok(gain - objective.lambda * penalty)
}

/// Ascent iterations per start.
const MAX_ASCENT_ITERS: usize = 200;
/// Stop once the finite-difference gradient norm falls below this.
const GRAD_NORM_TOL: f64 = 1e-8;
/// Iterates beyond this norm signal an unbounded objective.
const DIVERGENCE_NORM: f64 = 1e6;

/// Choose the next designable input by multi-start projected gradient
/// ascent on the design objective.
///
/// Starts are drawn from the input set; every iterate is projected back
/// onto it (for balls and boxes) in addition to the penalty term. Ties
/// across equal-scoring starts resolve to the lowest start index.
pub fn design_input<R: Rng + ?Sized>(
    objective: &InformationObjective,
    theta_plus: &DVector<f64>,
    model: &ParametricModel,
    dataset: &Dataset,
    starts: usize,
    rng: &mut R,
) -> Result<DVector<f64>> {
    assert!(starts >= 1, "need at least one start");
    let dim = dataset.designable_dim();
    let context = dataset.next_context();

    let score = |x: &DVector<f64>| -> Result<f64> {
        design_objective(x, objective, theta_plus, model, dataset, &context)
    };

    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut diverged = false;

    for _ in 0..starts {
        let x0 = objective
            .input_set
            .project(&objective.input_set.sample(dim, rng));
        match ascend(&score, &objective.input_set, x0)? {
            Ascent::Finished(value, x) => {
                if best.as_ref().is_none_or(|(b, _)| value > *b) {
                    best = Some((value, x));
                }
            }
            Ascent::Diverged => diverged = true,
            Ascent::NonFinite => {}
        }
    }

    match best {
        Some((_, x)) => Ok(x),
        None if diverged => Err(Error::DesignDiverged {
            norm: DIVERGENCE_NORM,
        }),
        None => Err(Error::DesignFailed),
    }
}

enum Ascent {
    /// Converged (or hit the iteration cap) at a finite objective value.
    Finished(f64, DVector<f64>),
    /// The iterate ran past the divergence guard.
    Diverged,
    /// The objective was non-finite at the start.
    NonFinite,
}

/// Projected gradient ascent with central-difference gradients and a
/// backtracking line search.
fn ascend(
    score: &impl Fn(&DVector<f64>) -> Result<f64>,
    input_set: &Constraint,
    x0: DVector<f64>,
) -> Result<Ascent> {
    let mut x = x0;
    let mut fx = match score(&x) {
        Ok(v) if v.is_finite() => v,
        Ok(_) => return Ok(Ascent::NonFinite),
        Err(Error::NonFiniteEval { .. }) => return Ok(Ascent::NonFinite),
        Err(e) => return Err(e),
    };
    let mut step = 1.0f64;

    for _ in 0..MAX_ASCENT_ITERS {
        let grad = fd_gradient(score, &x)?;
        let gnorm = grad.norm();
        if gnorm < GRAD_NORM_TOL {
            break;
        }
        let dir = &grad / gnorm;

        // Backtracking from an adaptive trial step; grow it again after
        // first-try successes.
        let mut t = step;
        let mut advanced = false;
        for attempt in 0..40 {
            let trial = input_set.project(&(&x + &dir * t));
            if trial.norm() > DIVERGENCE_NORM {
                return Ok(Ascent::Diverged);
            }
            let ft = match score(&trial) {
                Ok(v) => v,
                Err(Error::NonFiniteEval { .. }) => {
                    t *= 0.5;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if ft.is_finite() && ft > fx {
                let moved = (&trial - &x).norm();
                x = trial;
                fx = ft;
                if attempt == 0 {
                    step = (t * 2.0).min(1e6);
                } else {
                    step = t.max(1e-12);
                }
                advanced = moved >= 1e-12;
                break;
            }
            t *= 0.5;
        }
        if !advanced {
            break;
        }
    }

    Ok(Ascent::Finished(fx, x))
}

/// Central-difference gradient of the design objective.
fn fd_gradient(
    score: &impl Fn(&DVector<f64>) -> Result<f64>,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    let mut grad = DVector::zeros(x.len());
    let mut probe = x.clone();
    for j in 0..x.len() {
        let xj = x[j];
        let h = 1e-6 * (1.0 + xj.abs());
        probe[j] = xj + h;
        let fp = score(&probe)?;
        probe[j] = xj - h;
        let fm = score(&probe)?;
        probe[j] = xj;
        grad[j] = (fp - fm) / (2.0 * h);
    }
    Ok(grad)
}
