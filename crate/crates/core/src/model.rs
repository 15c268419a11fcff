//! System oracle, parametric model family, dataset, and linearization
//! primitives.
//!
//! The oracle is a black box mapping inputs to outputs; the model family
//! `f(x; θ)` is what gets fit to it. Both are plain value types wrapping
//! re-entrant closures, so they can be shared freely across threads.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

type EvalFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
type ModelFn = dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync;
type JacobianFn = dyn Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// The true system: a deterministic black-box query from inputs to outputs.
#[derive(Clone)]
pub struct SystemOracle {
    query: Arc<EvalFn>,
    input_dim: usize,
    output_dim: usize,
}

impl SystemOracle {
    pub fn new(
        input_dim: usize,
        output_dim: usize,
        query: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            query: Arc::new(query),
            input_dim,
            output_dim,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    /// Query the system, checking dimensions and finiteness.
    pub fn query(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::Dimension {
                what: "oracle input",
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let y = (self.query)(x);
        if y.len() != self.output_dim {
            return Err(Error::Dimension {
                what: "oracle output",
                expected: self.output_dim,
                got: y.len(),
            });
        }
        check_finite(&y, "oracle output")?;
        Ok(y)
    }
}

impl fmt::Debug for SystemOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemOracle")
            .field("input_dim", &self.input_dim)
            .field("output_dim", &self.output_dim)
            .finish()
    }
}

/// A parametric family `f(x; θ)` with an optional analytic Jacobian
/// `∂f/∂θ`. When the Jacobian is absent a central finite-difference
/// approximation is substituted.
#[derive(Clone)]
pub struct ParametricModel {
    eval: Arc<ModelFn>,
    jacobian: Option<Arc<JacobianFn>>,
    param_dim: usize,
}

impl ParametricModel {
    pub fn new(
        param_dim: usize,
        eval: impl Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            jacobian: None,
            param_dim,
        }
    }

    /// Attach an analytic Jacobian `(x, θ) → d_y × d_θ`.
    pub fn with_jacobian(
        mut self,
        jacobian: impl Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    /// Evaluate `f(x; θ)`, checking finiteness of every output coordinate.
    pub fn eval(&self, x: &DVector<f64>, theta: &DVector<f64>) -> Result<DVector<f64>> {
        if theta.len() != self.param_dim {
            return Err(Error::Dimension {
                what: "parameter vector",
                expected: self.param_dim,
                got: theta.len(),
            });
        }
        let y = (self.eval)(x, theta);
        check_finite(&y, "model output")?;
        Ok(y)
    }

    /// `∂f/∂θ` at `(x, θ)`: analytic when available, otherwise central
    /// finite differences with per-coordinate step `1e-6·(1+|θ_j|)`.
    pub fn jacobian(&self, x: &DVector<f64>, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        match &self.jacobian {
            Some(jac) => {
                let c = jac(x, theta);
                check_finite_matrix(&c, "jacobian")?;
                Ok(c)
            }
            None => scaled_fd_jacobian(self, x, theta),
        }
    }
}

impl fmt::Debug for ParametricModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricModel")
            .field("param_dim", &self.param_dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

/// Rule producing the fixed (non-designable) input coordinates of the next
/// query for sequential systems.
#[derive(Debug, Clone, PartialEq)]
pub enum ContextRule {
    /// Stateless system: every input coordinate is designable, the context
    /// is empty.
    Stateless,
    /// Sequential system: the context is the latest output in the dataset
    /// (the current state of the trajectory).
    LatestOutput,
}

/// Ordered input–output pairs plus the designable-slice descriptor.
#[derive(Debug, Clone)]
pub struct Dataset {
    points: Vec<(DVector<f64>, DVector<f64>)>,
    designable: Range<usize>,
    context_rule: ContextRule,
    input_dim: usize,
    output_dim: usize,
}

impl Dataset {
    /// A dataset for a stateless system: the whole input is designable.
    pub fn stateless(input_dim: usize, output_dim: usize) -> Self {
        Self {
            points: Vec::new(),
            designable: 0..input_dim,
            context_rule: ContextRule::Stateless,
            input_dim,
            output_dim,
        }
    }

    /// A dataset for a sequential system. `designable` is the index range
    /// of controllable input coordinates; the rest is filled by the
    /// context rule.
    pub fn sequential(input_dim: usize, output_dim: usize, designable: Range<usize>) -> Self {
        assert!(!designable.is_empty() && designable.end <= input_dim);
        Self {
            points: Vec::new(),
            designable,
            context_rule: ContextRule::LatestOutput,
            input_dim,
            output_dim,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn points(&self) -> &[(DVector<f64>, DVector<f64>)] {
        &self.points
    }

    pub fn inputs(&self) -> impl Iterator<Item = &DVector<f64>> {
        self.points.iter().map(|(x, _)| x)
    }

    pub fn designable_slice(&self) -> Range<usize> {
        self.designable.clone()
    }

    pub fn designable_dim(&self) -> usize {
        self.designable.len()
    }

    pub fn context_rule(&self) -> &ContextRule {
        &self.context_rule
    }

    /// Append an observed pair, checking dimensions.
    pub fn push(&mut self, x: DVector<f64>, y: DVector<f64>) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Dimension {
                what: "dataset input",
                expected: self.input_dim,
                got: x.len(),
            });
        }
        if y.len() != self.output_dim {
            return Err(Error::Dimension {
                what: "dataset output",
                expected: self.output_dim,
                got: y.len(),
            });
        }
        self.points.push((x, y));
        Ok(())
    }

    /// Fixed input coordinates of the next query, in input order with the
    /// designable slice removed. Empty for stateless systems.
    pub fn next_context(&self) -> DVector<f64> {
        match self.context_rule {
            ContextRule::Stateless => DVector::zeros(0),
            ContextRule::LatestOutput => {
                let state = self
                    .points
                    .last()
                    .map(|(_, y)| y.clone())
                    .unwrap_or_else(|| DVector::zeros(self.output_dim));
                state
            }
        }
    }

    /// Assemble a full input vector from a designable candidate and a
    /// context vector covering the remaining coordinates.
    pub fn assemble_input(&self, candidate: &DVector<f64>, context: &DVector<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.input_dim);
        let mut ctx_idx = 0;
        for i in 0..self.input_dim {
            if self.designable.contains(&i) {
                x[i] = candidate[i - self.designable.start];
            } else {
                x[i] = context[ctx_idx];
                ctx_idx += 1;
            }
        }
        x
    }
}

/// First-order Taylor expansion of the model at `(x, θ̂)`:
/// `f(x; θ) ≈ b + C·θ` with `b = f(x; θ̂) − C·θ̂`.
#[derive(Debug, Clone)]
pub struct Linearization {
    /// Offset vector, d_y.
    pub b: DVector<f64>,
    /// Sensitivity matrix ∂f/∂θ, d_y × d_θ.
    pub c: DMatrix<f64>,
    /// Parameter vector the expansion was taken at.
    pub expansion_point: DVector<f64>,
}

impl Linearization {
    /// Evaluate the affine approximation `b + C·θ`.
    pub fn predict(&self, theta: &DVector<f64>) -> DVector<f64> {
        &self.b + &self.c * theta
    }
}

/// Linearize the model at `(x, θ̂)`.
pub fn linearize(
    model: &ParametricModel,
    x: &DVector<f64>,
    theta_hat: &DVector<f64>,
) -> Result<Linearization> {
    let f = model.eval(x, theta_hat)?;
    let c = model.jacobian(x, theta_hat)?;
    let b = &f - &c * theta_hat;
    Ok(Linearization {
        b,
        c,
        expansion_point: theta_hat.clone(),
    })
}

/// Linearize the model at every input of the dataset.
pub fn linearize_dataset(
    model: &ParametricModel,
    dataset: &Dataset,
    theta_hat: &DVector<f64>,
) -> Result<Vec<Linearization>> {
    dataset
        .inputs()
        .map(|x| linearize(model, x, theta_hat))
        .collect()
}

/// Central finite-difference Jacobian with a uniform step `h`:
/// column j is `(f(x; θ̂ + h·e_j) − f(x; θ̂ − h·e_j)) / (2h)`.
pub fn finite_difference_jacobian(
    model: &ParametricModel,
    x: &DVector<f64>,
    theta_hat: &DVector<f64>,
    h: f64,
) -> Result<DMatrix<f64>> {
    assert!(h > 0.0, "finite-difference step must be positive");
    fd_jacobian_impl(model, x, theta_hat, |_| h)
}

/// Central differences with the default per-coordinate step
/// `1e-6·(1+|θ̂_j|)`, used when no analytic Jacobian is supplied.
fn scaled_fd_jacobian(
    model: &ParametricModel,
    x: &DVector<f64>,
    theta_hat: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    fd_jacobian_impl(model, x, theta_hat, |t| 1e-6 * (1.0 + t.abs()))
}

fn fd_jacobian_impl(
    model: &ParametricModel,
    x: &DVector<f64>,
    theta_hat: &DVector<f64>,
    step: impl Fn(f64) -> f64,
) -> Result<DMatrix<f64>> {
    let d_theta = theta_hat.len();
    let probe = model.eval(x, theta_hat)?;
    let d_y = probe.len();
    let mut jac = DMatrix::<f64>::zeros(d_y, d_theta);
    let mut plus = theta_hat.clone();
    let mut minus = theta_hat.clone();
    for j in 0..d_theta {
        let tj = theta_hat[j];
        let h = step(tj);
        plus[j] = tj + h;
        minus[j] = tj - h;
        let fp = model.eval(x, &plus)?;
        let fm = model.eval(x, &minus)?;
        for i in 0..d_y {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
        plus[j] = tj;
        minus[j] = tj;
    }
    check_finite_matrix(&jac, "jacobian")?;
    Ok(jac)
}

pub(crate) fn check_finite(v: &DVector<f64>, what: &'static str) -> Result<()> {
    for (i, &value) in v.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteEval {
                what,
                coord: i,
                value,
            });
        }
    }
    Ok(())
}

pub(crate) fn check_finite_matrix(m: &DMatrix<f64>, what: &'static str) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let value = m[(i, j)];
            if !value.is_finite() {
                return Err(Error::NonFiniteEval {
                    what,
                    coord: i * m.ncols() + j,
                    value,
                });
            }
        }
    }
    Ok(())
}
