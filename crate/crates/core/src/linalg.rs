//! Small dense linear-algebra helpers: jitter policy, log-determinants,
//! symmetric solves.
//!
//! All covariances in this crate go through the same jitter policy so that
//! sample covariances built from few (or perfectly fit) residuals stay
//! invertible and their log-determinants stay finite.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Jitter magnitude for a d×d PSD matrix with the given trace:
/// `max(1e-9, 1e-9 * trace / d)`.
pub fn jitter_for(trace: f64, dim: usize) -> f64 {
    let scaled = 1e-9 * trace / dim.max(1) as f64;
    scaled.max(1e-9)
}

/// Force exact symmetry: (m + mᵀ) / 2.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Maximum absolute asymmetry |m - mᵀ|∞.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Cholesky factorization that retries with escalating jitter when the
/// matrix is singular or indefinite at round-off level.
///
/// Starts from the standard jitter policy and multiplies by 10 on each
/// failure, up to six attempts.
pub fn jittered_cholesky(m: &DMatrix<f64>, what: &'static str) -> Result<Cholesky<f64, Dyn>> {
    let sym = symmetrize(m);
    if let Some(chol) = Cholesky::new(sym.clone()) {
        return Ok(chol);
    }
    let mut jitter = jitter_for(sym.trace(), sym.nrows());
    for _ in 0..6 {
        let mut bumped = sym.clone();
        for i in 0..bumped.nrows() {
            bumped[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(bumped) {
            return Ok(chol);
        }
        jitter *= 10.0;
    }
    Err(Error::NotPositiveDefinite { what })
}

/// log det of a symmetric positive (semi-)definite matrix via jittered
/// Cholesky. An empty matrix has log det 0 by convention.
pub fn logdet_psd(m: &DMatrix<f64>, what: &'static str) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let chol = jittered_cholesky(m, what)?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Inverse of a symmetric positive definite matrix. Fails (no jitter
/// escalation beyond the shared policy) when the matrix is not PD.
pub fn spd_inverse(m: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    Ok(jittered_cholesky(m, what)?.inverse())
}

/// Solve m x = b for symmetric positive definite m.
pub fn spd_solve(m: &DMatrix<f64>, b: &DVector<f64>, what: &'static str) -> Result<DVector<f64>> {
    Ok(jittered_cholesky(m, what)?.solve(b))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    nalgebra::SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}

/// Sample second moment of residual vectors plus jitter:
/// `(1/n) Σ rᵢ rᵢᵀ + jitter·I`.
///
/// No mean subtraction; callers rely on the raw second moment.
pub fn second_moment(residuals: &[DVector<f64>], dim: usize) -> DMatrix<f64> {
    let n = residuals.len().max(1);
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for r in residuals {
        m.ger(1.0 / n as f64, r, r, 1.0);
    }
    let m = symmetrize(&m);
    let jitter = jitter_for(m.trace(), dim);
    let mut out = m;
    for i in 0..dim {
        out[(i, i)] += jitter;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_moment_of_zero_residuals_is_jitter_identity() {
        let res = vec![DVector::zeros(2), DVector::zeros(2)];
        let m = second_moment(&res, 2);
        assert_eq!(m[(0, 0)], 1e-9);
        assert_eq!(m[(1, 1)], 1e-9);
        assert_eq!(m[(0, 1)], 0.0);
    }

    #[test]
    fn second_moment_single_outer_product() {
        let res = vec![DVector::from_vec(vec![1.0, 0.0])];
        let m = second_moment(&res, 2);
        let jitter = jitter_for(1.0, 2);
        assert!((m[(0, 0)] - (1.0 + jitter)).abs() < 1e-15);
        assert!((m[(1, 1)] - jitter).abs() < 1e-15);
        assert_eq!(m[(0, 1)], 0.0);
    }

    #[test]
    fn second_moment_uncentered() {
        // Residuals (1,1) and (-1,-1) have zero mean but full second moment.
        let res = vec![
            DVector::from_vec(vec![1.0, 1.0]),
            DVector::from_vec(vec![-1.0, -1.0]),
        ];
        let m = second_moment(&res, 2);
        let jitter = jitter_for(2.0, 2);
        assert!((m[(0, 0)] - (1.0 + jitter)).abs() < 1e-15);
        assert!((m[(0, 1)] - 1.0).abs() < 1e-15);
        assert!((m[(1, 0)] - 1.0).abs() < 1e-15);
        assert!((m[(1, 1)] - (1.0 + jitter)).abs() < 1e-15);
    }

    #[test]
    fn logdet_of_singular_matrix_is_finite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let ld = logdet_psd(&m, "test").unwrap();
        assert!(ld.is_finite());
    }

    #[test]
    fn logdet_matches_known_value() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        let ld = logdet_psd(&m, "test").unwrap();
        assert!((ld - 6.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn spd_inverse_roundtrip() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let inv = spd_inverse(&m, "test").unwrap();
        let eye = &m * &inv;
        assert!((eye[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(eye[(0, 1)].abs() < 1e-12);
    }
}
