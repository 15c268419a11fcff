//! Norm-constrained convex quadratic minimization via the secular equation.
//!
//! Solves min ½ θᵀHθ − gᵀθ subject to ‖θ − center‖₂ ≤ δ for symmetric PSD H.
//! In step coordinates s = θ − center this is the standard trust-region
//! subproblem min ½ sᵀHs + cᵀs, ‖s‖ ≤ δ with c = H·center − g. The KKT
//! conditions give (H + μI)s = −c for some μ ≥ 0 with μ·(‖s‖ − δ) = 0, and
//! μ is found by safeguarded bisection on ‖(H + μI)⁻¹ c‖ = δ.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::symmetrize;

/// Maximum bisection steps for the secular equation.
const MAX_BISECTION_STEPS: usize = 200;

/// Eigenvalues below this (relative to the largest) are treated as zero.
const NULL_SPACE_TOL: f64 = 1e-12;

/// Solution of the norm-constrained quadratic.
#[derive(Debug, Clone)]
pub struct TrustRegionStep {
    /// The minimizer θ = center + s.
    pub theta: DVector<f64>,
    /// KKT multiplier μ ≥ 0 of the norm constraint (0 for interior steps).
    pub multiplier: f64,
    /// Whether the solution lies on the constraint boundary.
    pub on_boundary: bool,
}

/// Minimize ½ θᵀHθ − gᵀθ over the ball ‖θ − center‖ ≤ delta.
///
/// H must be symmetric positive semidefinite (it is assembled from prior
/// precisions and Gauss-Newton terms, so this holds by construction).
pub fn solve_trust_region_step(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    center: &DVector<f64>,
    delta: f64,
) -> Result<TrustRegionStep> {
    assert!(delta > 0.0, "trust radius must be positive");
    let dim = center.len();
    if dim == 0 {
        return Ok(TrustRegionStep {
            theta: center.clone(),
            multiplier: 0.0,
            on_boundary: false,
        });
    }

    let eig = nalgebra::SymmetricEigen::new(symmetrize(h));
    let lambda = &eig.eigenvalues;
    let q = &eig.eigenvectors;
    let lambda_max = lambda.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let zero_tol = NULL_SPACE_TOL * (1.0 + lambda_max);

    // Right-hand side in eigencoordinates: (H + μI) s = g − H·center.
    let rhs = g - h * center;
    let w = q.transpose() * &rhs;

    // Norm of s(μ) = Σ w_i / (λ_i + μ) q_i, treating near-zero eigenvalues
    // with zero weight as absent (pseudo-inverse at μ = 0).
    let step_norm = |mu: f64| -> f64 {
        let mut sq = 0.0;
        for i in 0..dim {
            let denom = lambda[i].max(0.0) + mu;
            if denom <= zero_tol {
                if w[i].abs() > zero_tol * (1.0 + w.amax()) {
                    return f64::INFINITY;
                }
                continue;
            }
            let si = w[i] / denom;
            sq += si * si;
        }
        sq.sqrt()
    };

    let build_step = |mu: f64| -> DVector<f64> {
        let mut s = DVector::zeros(dim);
        for i in 0..dim {
            let denom = lambda[i].max(0.0) + mu;
            if denom <= zero_tol {
                continue;
            }
            s.axpy(w[i] / denom, &q.column(i).into_owned(), 1.0);
        }
        s
    };

    // Interior candidate: pseudo-inverse solution at μ = 0.
    let interior_norm = step_norm(0.0);
    if interior_norm <= delta {
        let s = build_step(0.0);
        return Ok(TrustRegionStep {
            theta: center + s,
            multiplier: 0.0,
            on_boundary: (interior_norm - delta).abs() <= 1e-8 * delta,
        });
    }

    // Boundary solution: bisect μ in (lo, hi] where ‖s(lo)‖ > δ ≥ ‖s(hi)‖.
    // ‖s(μ)‖ ≤ ‖w‖/μ, so μ = ‖w‖/δ is a valid upper bound.
    let mut lo = 0.0f64;
    let mut hi = (w.norm() / delta).max(1e-300);
    while step_norm(hi) > delta {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::SecularNonConvergence {
                iters: MAX_BISECTION_STEPS,
            });
        }
    }

    let mut mu = hi;
    let mut converged = false;
    for _ in 0..MAX_BISECTION_STEPS {
        mu = 0.5 * (lo + hi);
        let n = step_norm(mu);
        if (n - delta).abs() <= 1e-12 * delta {
            converged = true;
            break;
        }
        if n > delta {
            lo = mu;
        } else {
            hi = mu;
        }
        if (hi - lo) <= f64::EPSILON * hi.max(1.0) {
            mu = hi;
            converged = true;
            break;
        }
    }
    if !converged {
        // The interval has still collapsed enough for the KKT tolerance
        // whenever 200 halvings ran; a non-finite interval is the real
        // failure mode.
        mu = hi;
        if !step_norm(mu).is_finite() {
            return Err(Error::SecularNonConvergence {
                iters: MAX_BISECTION_STEPS,
            });
        }
    }

    // Rescale onto the boundary exactly; bisection leaves ‖s‖ within
    // round-off of δ already.
    let mut s = build_step(mu);
    let n = s.norm();
    if n > 0.0 {
        s *= delta / n;
    }
    Ok(TrustRegionStep {
        theta: center + s,
        multiplier: mu,
        on_boundary: true,
    })
}
