//! Active Bayesian system identification.
//!
//! The library fits a parametric model family to a black-box system by
//! iterating two phases: a trust-region linearized-MAP parameter update
//! whose noise covariance is recalibrated online from the realized
//! residuals, and an informative input design step that picks the next
//! query by maximizing a scalar measure (log det by default) of the
//! approximate posterior information matrix.
//!
//! The crate is organized around four modules:
//!
//! * [`model`] — system oracle, parametric family, dataset, linearization.
//! * [`estimator`] — the MAP update, residual split, covariance
//!   calibration, and the inner estimate-improvement loop.
//! * [`design`] — posterior information, magnitude measures, constraint
//!   sets, and multi-start penalized/projected gradient ascent over the
//!   next input.
//! * [`bench`] — the linear, Hénon, unicycle, and model-mismatch
//!   benchmark cases.

pub mod bench;
pub mod design;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod model;

pub use error::{Error, Result};

pub use bench::BenchmarkCase;
pub use design::{design_input, posterior_information, Constraint, InformationObjective, Measure};
pub use estimator::{
    estimation_loop, map_step, CalibrationState, EstimationOutcome, GaussianBelief, Residuals,
};
pub use model::{linearize, Dataset, Linearization, ParametricModel, SystemOracle};
