//! Analytic vs finite-difference Jacobian agreement across the benchmark
//! families, plus linearization exactness properties.

use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sysid_core::bench::BenchmarkCase;
use sysid_core::model::{finite_difference_jacobian, linearize};

fn entry_tol(entry: f64) -> f64 {
    (1e-5f64).max(1e-5 * entry.abs())
}

#[test]
fn analytic_and_fd_jacobians_agree_on_all_benchmark_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a61_636f);
    for case in BenchmarkCase::all() {
        assert!(case.family.has_analytic_jacobian(), "{}", case.name);
        let d_x = case.oracle.input_dim();
        let d_theta = case.family.param_dim();
        for draw in 0..100 {
            let x = DVector::from_fn(d_x, |_, _| rng.random_range(-2.0..2.0));
            let theta = DVector::from_fn(d_theta, |_, _| rng.random_range(-2.0..2.0));
            let analytic = case.family.jacobian(&x, &theta).unwrap();
            let fd = finite_difference_jacobian(&case.family, &x, &theta, 1e-6).unwrap();
            for i in 0..analytic.nrows() {
                for j in 0..analytic.ncols() {
                    let diff = (analytic[(i, j)] - fd[(i, j)]).abs();
                    assert!(
                        diff <= entry_tol(analytic[(i, j)]),
                        "{} draw {draw}: entry ({i},{j}) differs by {diff}",
                        case.name
                    );
                }
            }
        }
    }
}

proptest! {
    /// b + C·θ̂ reproduces f(x; θ̂) at the expansion point for every family.
    #[test]
    fn linearize_is_exact_at_expansion_point(
        seed in any::<u64>(),
        case_idx in 0usize..5,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let case = &BenchmarkCase::all()[case_idx];
        let x = DVector::from_fn(case.oracle.input_dim(), |_, _| rng.random_range(-2.0..2.0));
        let theta = DVector::from_fn(case.family.param_dim(), |_, _| rng.random_range(-2.0..2.0));
        let lin = linearize(&case.family, &x, &theta).unwrap();
        let f = case.family.eval(&x, &theta).unwrap();
        let err = (&f - lin.predict(&theta)).amax();
        prop_assert!(err <= 1e-12 * (1.0 + f.amax()));
    }

    /// Every benchmark family is linear in θ, so the Taylor expansion is
    /// exact globally, not just near the expansion point.
    #[test]
    fn benchmark_families_are_taylor_exact_everywhere(
        seed in any::<u64>(),
        case_idx in 0usize..5,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let case = &BenchmarkCase::all()[case_idx];
        let x = DVector::from_fn(case.oracle.input_dim(), |_, _| rng.random_range(-2.0..2.0));
        let at = DVector::from_fn(case.family.param_dim(), |_, _| rng.random_range(-2.0..2.0));
        let lin = linearize(&case.family, &x, &at).unwrap();
        let far = DVector::from_fn(case.family.param_dim(), |_, _| rng.random_range(-5.0..5.0));
        let f = case.family.eval(&x, &far).unwrap();
        prop_assert!((&f - lin.predict(&far)).amax() <= 1e-10);
    }
}
