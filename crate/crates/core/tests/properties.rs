//! Property tests for the structural invariants: quotient homogeneity,
//! translation invariance, exactness of the constant identities, and the
//! bit-exact profile file round-trip.

use proptest::prelude::*;

use rellich_core::emden_fowler::{
    discrete_quotient, read_profile, write_profile, Grid1D, Profile1D, ReducedForm,
};
use rellich_core::exact;
use rellich_core::params::ProblemParams;

fn bump_profile(grid: Grid1D, centers: &[(f64, f64, f64)]) -> Profile1D {
    Profile1D::from_fn(grid, |t| {
        centers
            .iter()
            .map(|&(a, c, w)| a * (-(t - c) * (t - c) / (w * w)).exp())
            .sum()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quotient_is_homogeneous_degree_zero(
        a1 in 0.2f64..2.0,
        c1 in -3.0f64..3.0,
        w1 in 0.5f64..2.0,
        a2 in -1.0f64..1.0,
        c2 in -3.0f64..3.0,
        w2 in 0.5f64..2.0,
        scale in prop::sample::select(vec![-7.5f64, -0.01, 0.3, 42.0, 1e6]),
    ) {
        let grid = Grid1D::new(20.0, 512).unwrap();
        let w = bump_profile(grid, &[(a1, c1, w1), (a2, c2, w2)]);
        let form = ReducedForm::fourth_raw(3.25, 1.5625, 4.0, 1.0).unwrap();
        let q0 = discrete_quotient(&form, &w).unwrap();
        let mut s = w.clone();
        s.scale(scale);
        let qs = discrete_quotient(&form, &s).unwrap();
        prop_assert!((qs - q0).abs() <= 1e-12 * q0.abs());
    }

    #[test]
    fn quotient_is_translation_invariant(
        a1 in 0.2f64..2.0,
        w1 in 0.5f64..1.5,
        shift in -40isize..40,
    ) {
        let grid = Grid1D::new(20.0, 1024).unwrap();
        let w = bump_profile(grid, &[(a1, 0.0, w1)]);
        let form = ReducedForm::second_raw(0.25, 3.0, 1.0).unwrap();
        let q0 = discrete_quotient(&form, &w).unwrap();
        let mut s = w.clone();
        s.translate_cells(shift);
        let qs = discrete_quotient(&form, &s).unwrap();
        prop_assert!((qs - q0).abs() <= 1e-10 * q0.abs());
    }

    #[test]
    fn quadratic_identity_is_exact_in_rationals(
        n in 5u32..=10,
        alpha_num in -200i64..200,
        lambda_num in -500i64..500,
    ) {
        // alpha scaled into the admissible window
        let lo = 4.0 - n as f64;
        let hi = n as f64;
        let alpha = lo + (alpha_num as f64 + 200.5) / 401.0 * (hi - lo);
        let lambda = lambda_num as f64 / 64.0;
        let (ar, lr) = (exact::rat(alpha), exact::rat(lambda));
        let a = exact::a_lambda(n, &ar, &lr);
        let b = exact::b_lambda(n, &ar, &lr);
        let t = exact::rat(n as f64 - 2.0) * (&ar - exact::rat(2.0)) / exact::rat(2.0)
            - &lr / exact::rat(2.0);
        prop_assert_eq!(&a * &a - &b, &t * &t);
    }

    #[test]
    fn profile_files_round_trip_bit_exactly(
        seedling in proptest::collection::vec(-1.0f64..1.0, 65),
        half in 5.0f64..50.0,
    ) {
        let grid = Grid1D::new(half, 64).unwrap();
        let w = Profile1D::new(grid, seedling).unwrap();
        let p = ProblemParams::new(5, 0.125, 3.0, 0.5).unwrap();
        let mut buf = Vec::new();
        write_profile(&mut buf, &w, &p).unwrap();
        let (w2, p2) = read_profile(&mut buf.as_slice()).unwrap();
        prop_assert_eq!(w.values(), w2.values());
        prop_assert_eq!(w.grid(), w2.grid());
        prop_assert_eq!(p, p2);
    }
}
