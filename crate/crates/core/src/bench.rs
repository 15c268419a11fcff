//! Benchmark systems and model families: a 2×2 linear map, the Hénon map,
//! discrete-time unicycle kinematics, and two deliberately inadequate
//! linear families fit against the Hénon map.

use nalgebra::{DMatrix, DVector};

use crate::design::Constraint;
use crate::model::{Dataset, ParametricModel, SystemOracle};

/// Time step of the unicycle dynamics.
pub const UNICYCLE_DT: f64 = 0.1;

/// Default input bound for the Hénon map experiments (the map itself is
/// unconstrained; the bound keeps the quadratic term well scaled).
pub const HENON_INPUT_RADIUS: f64 = 2.0;

/// A true system paired with the parametric family used to identify it.
#[derive(Debug, Clone)]
pub struct BenchmarkCase {
    /// Identifier used by the CLI.
    pub name: &'static str,
    pub oracle: SystemOracle,
    pub family: ParametricModel,
    /// True parameters when the family contains the system.
    pub theta_true: Option<DVector<f64>>,
    /// Constraint on the designable input slice.
    pub input_constraint: Constraint,
    /// Whether inputs must be designed in sequence along a trajectory.
    pub sequential: bool,
}

impl BenchmarkCase {
    /// Fresh empty dataset with the right shape for this case.
    pub fn empty_dataset(&self) -> Dataset {
        if self.sequential {
            // Unicycle input is (state x ∈ R³, control u ∈ R²).
            Dataset::sequential(self.oracle.input_dim(), self.oracle.output_dim(), 3..5)
        } else {
            Dataset::stateless(self.oracle.input_dim(), self.oracle.output_dim())
        }
    }

    /// All benchmark cases, in CLI order.
    pub fn all() -> Vec<BenchmarkCase> {
        let mut cases = vec![linear_case(), henon_case(), unicycle_case()];
        cases.extend(mismatch_cases());
        cases
    }

    /// Look a case up by its CLI name.
    pub fn by_name(name: &str) -> Option<BenchmarkCase> {
        Self::all().into_iter().find(|c| c.name == name)
    }
}

fn henon_oracle() -> SystemOracle {
    SystemOracle::new(2, 2, |x| {
        DVector::from_vec(vec![1.0 - 1.4 * x[0] * x[0] + x[1], 0.3 * x[0]])
    })
}

/// Four-parameter linear family f(x; θ) = [[θ1, θ2], [θ3, θ4]] x.
fn full_linear_family() -> ParametricModel {
    ParametricModel::new(4, |x, t| {
        DVector::from_vec(vec![t[0] * x[0] + t[1] * x[1], t[2] * x[0] + t[3] * x[1]])
    })
    .with_jacobian(|x, _| {
        DMatrix::from_row_slice(2, 4, &[x[0], x[1], 0.0, 0.0, 0.0, 0.0, x[0], x[1]])
    })
}

/// Linear system g(x) = [[1, 2], [3, 4]] x with the matching 4-parameter
/// family and an input norm bound of 0.5.
pub fn linear_case() -> BenchmarkCase {
    BenchmarkCase {
        name: "linear",
        oracle: SystemOracle::new(2, 2, |x| {
            DVector::from_vec(vec![x[0] + 2.0 * x[1], 3.0 * x[0] + 4.0 * x[1]])
        }),
        family: full_linear_family(),
        theta_true: Some(DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0])),
        input_constraint: Constraint::norm_ball(0.5),
        sequential: false,
    }
}

/// Hénon map (α = 1.4, β = 0.3) with the two-parameter family that
/// contains it.
pub fn henon_case() -> BenchmarkCase {
    BenchmarkCase {
        name: "henon",
        oracle: henon_oracle(),
        family: ParametricModel::new(2, |x, t| {
            DVector::from_vec(vec![1.0 - t[0] * x[0] * x[0] + x[1], t[1] * x[0]])
        })
        .with_jacobian(|x, _| DMatrix::from_row_slice(2, 2, &[-x[0] * x[0], 0.0, 0.0, x[0]])),
        theta_true: Some(DVector::from_vec(vec![1.4, 0.3])),
        input_constraint: Constraint::norm_ball(HENON_INPUT_RADIUS),
        sequential: false,
    }
}

/// Discrete-time unicycle. The input is (state, control) ∈ R⁵, the output
/// the next state; only the control slice is designable and |u₁| ≤ 1
/// (u₂ is given the same bound to keep the feasible set compact).
pub fn unicycle_case() -> BenchmarkCase {
    BenchmarkCase {
        name: "unicycle",
        oracle: SystemOracle::new(5, 3, |x| {
            let (px, py, heading, v, w) = (x[0], x[1], x[2], x[3], x[4]);
            DVector::from_vec(vec![
                px + v * UNICYCLE_DT * heading.cos(),
                py + v * UNICYCLE_DT * heading.sin(),
                heading + w * UNICYCLE_DT,
            ])
        }),
        family: ParametricModel::new(2, |x, t| {
            let (px, py, heading, v, w) = (x[0], x[1], x[2], x[3], x[4]);
            DVector::from_vec(vec![
                t[1] * px + v * t[0] * heading.cos(),
                t[1] * py + v * t[0] * heading.sin(),
                heading + w * t[0],
            ])
        })
        .with_jacobian(|x, _| {
            let (px, py, heading, v, w) = (x[0], x[1], x[2], x[3], x[4]);
            DMatrix::from_row_slice(
                3,
                2,
                &[v * heading.cos(), px, v * heading.sin(), py, w, 0.0],
            )
        }),
        theta_true: Some(DVector::from_vec(vec![0.1, 1.0])),
        input_constraint: Constraint::boxed(
            DVector::from_vec(vec![-1.0, -1.0]),
            DVector::from_vec(vec![1.0, 1.0]),
        ),
        sequential: true,
    }
}

/// The two inadequate families fit against the Hénon map: a tied-row
/// linear family with θ ∈ R², and the full 4-parameter linear family.
pub fn mismatch_cases() -> Vec<BenchmarkCase> {
    let tied = BenchmarkCase {
        name: "mismatch-tied",
        oracle: henon_oracle(),
        family: ParametricModel::new(2, |x, t| {
            let row = t[0] * x[0] + t[1] * x[1];
            DVector::from_vec(vec![row, row])
        })
        .with_jacobian(|x, _| DMatrix::from_row_slice(2, 2, &[x[0], x[1], x[0], x[1]])),
        theta_true: None,
        input_constraint: Constraint::norm_ball(HENON_INPUT_RADIUS),
        sequential: false,
    };
    let linear = BenchmarkCase {
        name: "mismatch-linear",
        oracle: henon_oracle(),
        family: full_linear_family(),
        theta_true: None,
        input_constraint: Constraint::norm_ball(HENON_INPUT_RADIUS),
        sequential: false,
    };
    vec![tied, linear]
}
