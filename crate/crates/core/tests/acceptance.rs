//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured figure next to its pinned tolerance.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use num::BigRational;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rellich_core::asymptotics::{limiting_profile_run, solve_eps_radial};
use rellich_core::emden_fowler::{
    discrete_quotient, reduce_fourth_order, reduce_second_order, Grid1D, Profile1D,
};
use rellich_core::exact;
use rellich_core::gamma::{gamma_alpha_numeric, mode_minimum};
use rellich_core::params::{omega_n, ProblemParams};
use rellich_core::quadrature::{
    bump_quotient, bump_scaling_exponent, quotient_of_u, reduction_cross_check,
    verify_ab_identities, verify_weight_shift_identity, BumpSpec, CompactBump, Curve1D,
    GaussCurve, GaussianRing, ModulatedGaussCurve, RadialQuadSpec, SechCurve,
};
use rellich_core::solvers::{solve_fourth, solve_second, SolverConfig};

fn rat(x: f64) -> BigRational {
    exact::rat(x)
}

#[test]
fn a01_constant_identities() {
    // a^2 - b = ((n-2)(alpha-2)/2 - lambda/2)^2 and b = delta + lambda*h,
    // 1000 random admissible points, checked exactly in rational
    // arithmetic and to 1e-12 relative in floating point.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n: u32 = rng.gen_range(5..=10);
        let alpha: f64 = rng.gen_range((4.0 - n as f64) + 1e-3..n as f64 - 1e-3);
        let lambda: f64 = rng.gen_range(-5.0..5.0);
        let (ar, lr) = (rat(alpha), rat(lambda));

        let a = exact::a_lambda(n, &ar, &lr);
        let b = exact::b_lambda(n, &ar, &lr);
        let rhs = {
            let t = rat((n as f64 - 2.0)) * (&ar - rat(2.0)) / rat(2.0) - &lr / rat(2.0);
            &t * &t
        };
        assert_eq!(&a * &a - &b, rhs, "square identity (exact) at n={n} alpha={alpha}");
        let b_alt = exact::delta_alpha(n, &ar) + &lr * exact::h_tilde_alpha(n, &ar);
        assert_eq!(b, b_alt, "affine identity (exact) at n={n} alpha={alpha}");

        // floating-point route
        let af = exact::to_f64(&a);
        let bf = exact::to_f64(&b);
        let rhsf = ((n as f64 - 2.0) * (alpha - 2.0) / 2.0 - lambda / 2.0).powi(2);
        let err = (af * af - bf - rhsf).abs() / rhsf.abs().max(1.0);
        worst = worst.max(err);
    }
    assert!(worst <= 1e-12, "worst fp identity error {worst}");
    println!("[PASS] A1 constant identities: exact over 1000 samples, worst fp error {worst:.2e} <= 1e-12");
}

#[test]
fn a02_mode_symbol_consistency() {
    // c_0^2 = delta and -2 c_0 + (alpha-2)^2 = 2 delta_tilde, exactly,
    // for alpha on a 0.05 grid in (4-n, n), n in {5,6,7}.
    let mut checked = 0usize;
    for n in [5u32, 6, 7] {
        let k_max = 20 * (2 * n as i64 - 4);
        for k in 1..k_max {
            let alpha = rat(4.0 - n as f64) + exact::rat_int(k) / exact::rat_int(20);
            let c0 = exact::mode_c(n, &alpha, 0);
            assert_eq!(&c0 * &c0, exact::delta_alpha(n, &alpha));
            let e = {
                let t = &alpha - rat(2.0);
                &t * &t
            };
            assert_eq!(
                -(&c0 + &c0) + e,
                rat(2.0) * exact::delta_tilde_alpha(n, &alpha)
            );
            checked += 1;
        }
    }
    println!("[PASS] A2 mode-symbol consistency: exact rational equality at {checked} grid points");
}

#[test]
fn a03_gamma_mode_scan() {
    // full scan equals (n-alpha)^2/4 within 1e-8 for alpha in {0,1,2,3};
    // radial-mode restriction within 1e-10 for all sampled admissible alpha
    let mut worst_full: f64 = 0.0;
    for n in [5u32, 6, 7] {
        for alpha in [0.0, 1.0, 2.0, 3.0] {
            let p = ProblemParams::new(n, alpha, 3.0, 0.0).unwrap();
            let scan = gamma_alpha_numeric(&p, 64, 1e-8).unwrap();
            let formula = (n as f64 - alpha).powi(2) / 4.0;
            let err = (scan.infimum - formula).abs() / formula;
            worst_full = worst_full.max(err);
            assert!(err <= 1e-8, "n={n} alpha={alpha}: {err}");
            assert!(!scan.cap_warning);
        }
    }
    let mut worst_mode0: f64 = 0.0;
    for n in [5u32, 6, 7] {
        let k_max = 20 * (2 * n as i64 - 4);
        for k in 1..k_max {
            let alpha = (4.0 - n as f64) + k as f64 / 20.0;
            let p = ProblemParams::new(n, alpha, 3.0, 0.0).unwrap();
            let (v, _) = mode_minimum(&p, 0);
            let formula = (n as f64 - alpha).powi(2) / 4.0;
            let err = (v - formula).abs() / formula;
            worst_mode0 = worst_mode0.max(err);
        }
    }
    assert!(worst_mode0 <= 1e-10, "worst radial-mode error {worst_mode0}");
    println!(
        "[PASS] A3 gamma scan: full-scan error {worst_full:.2e} <= 1e-8, radial-mode error {worst_mode0:.2e} <= 1e-10"
    );
}

#[test]
fn a04_second_order_soliton_oracle() {
    // (h=1/4, q=3) at N=4096, L=40: value (9/40)^{1/3} to 1e-4 relative,
    // profile matches the normalized soliton to 1e-3 sup-norm
    let form = reduce_second_order(&ProblemParams::new(5, 0.0, 3.0, 0.0).unwrap()).unwrap();
    let cfg = SolverConfig::with_grid(40.0, 4096).unwrap();
    let r = solve_second(&form, &cfg).unwrap();
    assert!(r.converged);
    let oracle = (9.0f64 / 40.0).powf(1.0 / 3.0);
    let val_err = (r.infimum_unscaled - oracle).abs() / oracle;
    assert!(val_err <= 1e-4, "value error {val_err}");

    let mut sol = Profile1D::from_fn(r.profile.grid(), |t| 0.375 / (t / 4.0).cosh().powi(2))
        .unwrap();
    sol.normalize_lq(3.0).unwrap();
    let sup = r
        .profile
        .values()
        .iter()
        .zip(sol.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(sup <= 1e-3, "profile sup deviation {sup}");
    println!("[PASS] A4 soliton oracle: value error {val_err:.2e} <= 1e-4, profile sup {sup:.2e} <= 1e-3");
}

#[test]
fn a05_cross_pipeline_critical_constant() {
    // reduced 1D solve at (5, 0, 0, 10) against the extremal-profile
    // quadrature, 1e-3 relative; residual certificate at 1e-6
    let p = ProblemParams::new(5, 0.0, 10.0, 0.0).unwrap();
    let form = reduce_fourth_order(&p).unwrap();
    let r = solve_fourth(&form, &SolverConfig::default()).unwrap();
    assert!(r.converged);
    assert!(r.el_residual <= 1e-6, "residual {}", r.el_residual);
    let quad = quotient_of_u(&p, &RadialQuadSpec::default()).unwrap();
    let err = (r.infimum - quad).abs() / quad;
    assert!(err <= 1e-3, "cross-pipeline disagreement {err}");
    println!(
        "[PASS] A5 cross-pipeline critical constant: |solve - quadrature|/quadrature = {err:.2e} <= 1e-3, residual {:.2e} <= 1e-6",
        r.el_residual
    );
}

#[test]
fn a06_lambda_alpha_sign_pattern() {
    // lambda_alpha = 0 at alpha in {0,4}; > 0 on (4-n,0) and (4,n);
    // < 0 and > -(n-alpha)^2/4 on (0,4); 0.05 grid, n in 5..=10
    let mut checked = 0usize;
    for n in 5u32..=10 {
        let k_max = 20 * (2 * n as i64 - 4);
        for k in 1..k_max {
            let alpha = rat(4.0 - n as f64) + exact::rat_int(k) / exact::rat_int(20);
            let la = exact::lambda_alpha(n, &alpha);
            let a_f = exact::to_f64(&alpha);
            if a_f == 0.0 || a_f == 4.0 {
                assert!(exact::is_zero(&la), "lambda_alpha nonzero at alpha={a_f}");
            } else if a_f > 0.0 && a_f < 4.0 {
                assert!(exact::is_positive(&(-la.clone())), "sign at alpha={a_f} n={n}");
                let floor = -exact::gamma_alpha_formula(n, &alpha);
                assert!(
                    exact::is_positive(&(la - floor)),
                    "threshold below -(n-alpha)^2/4 at alpha={a_f} n={n}"
                );
            } else {
                assert!(exact::is_positive(&la), "sign at alpha={a_f} n={n}");
            }
            checked += 1;
        }
    }
    println!("[PASS] A6 coupling-threshold sign pattern: exact at {checked} grid points");
}

#[test]
fn a07_reduction_cross_checks() {
    // n-dimensional quadrature of the three weighted forms vs omega_n x
    // 1D quadrature, three profiles, 1e-6 relative
    let quad = RadialQuadSpec::default();
    let p = ProblemParams::new(5, 0.5, 3.0, 0.0).unwrap();
    let curves: [(&str, &dyn Curve1D); 3] = [
        ("gaussian", &GaussCurve),
        ("sech", &SechCurve { k: 1.0 }),
        ("modulated", &ModulatedGaussCurve { freq: 2.0 }),
    ];
    let mut worst: f64 = 0.0;
    for (name, c) in curves {
        let chk = reduction_cross_check(&p, c, 20.0, 4097, &quad).unwrap();
        assert!(chk.max_rel_err <= 1e-6, "{name}: {chk:?}");
        worst = worst.max(chk.max_rel_err);
    }
    println!("[PASS] A7 log-radial reduction cross-checks: worst relative error {worst:.2e} <= 1e-6");
}

#[test]
fn a08_shifted_energy_and_weight_shift_identities() {
    let quad = RadialQuadSpec::default();
    // shifted-energy identities at 1e-6 over the admissible part of the
    // alpha grid {-2,-1,0,1,2,3} x n in {5,6,7}
    let mut worst_ab: f64 = 0.0;
    let mut count = 0usize;
    for n in [5u32, 6, 7] {
        for alpha in [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0] {
            if ProblemParams::new(n, alpha, 3.0, 0.0).is_err() {
                continue; // outside (4-n, n)
            }
            let rep = verify_ab_identities(n, alpha, &quad).unwrap();
            assert!(rep.pass, "n={n} alpha={alpha}: {rep:?}");
            worst_ab = worst_ab.max(rep.max_rel_err);
            count += 1;
        }
    }
    // weight-shift identity at 1e-8 for both test profiles
    let ring = GaussianRing { center: 1.0, width: 0.25 };
    let bump = CompactBump { center: 1.0, radius: 0.5 };
    let mut worst_ws: f64 = 0.0;
    for n in [5u32, 6, 7] {
        for alpha in [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0] {
            let e1 = verify_weight_shift_identity(n, alpha, &ring, &quad).unwrap();
            let e2 = verify_weight_shift_identity(n, alpha, &bump, &quad).unwrap();
            assert!(e1 <= 1e-8 && e2 <= 1e-8, "n={n} alpha={alpha}: {e1} {e2}");
            worst_ws = worst_ws.max(e1.max(e2));
        }
    }
    println!(
        "[PASS] A8 energy identities: shifted-energy worst {worst_ab:.2e} <= 1e-6 ({count} points), weight-shift worst {worst_ws:.2e} <= 1e-8"
    );
}

#[test]
fn a09_monotonicity_and_invariances() {
    // radial value nondecreasing in lambda over {-1, 0, 1, 5} at (5,0,4)
    let mut prev = f64::NEG_INFINITY;
    for lambda in [-1.0, 0.0, 1.0, 5.0] {
        let p = ProblemParams::new(5, 0.0, 4.0, lambda).unwrap();
        let r = solve_fourth(&reduce_fourth_order(&p).unwrap(), &SolverConfig::default()).unwrap();
        assert!(
            r.infimum >= prev,
            "radial value decreased: {prev} -> {} at lambda={lambda}",
            r.infimum
        );
        prev = r.infimum;
    }

    // discrete quotient invariances
    let p = ProblemParams::new(5, 0.0, 10.0, 0.0).unwrap();
    let form = reduce_fourth_order(&p).unwrap();
    let grid = Grid1D::new(20.0, 2048).unwrap();
    let w = Profile1D::from_fn(grid, |t| (-t * t).exp()).unwrap();
    let q0 = discrete_quotient(&form, &w).unwrap();
    let mut worst_translate: f64 = 0.0;
    for k in [3isize, -41, 128] {
        let mut s = w.clone();
        s.translate_cells(k);
        let qk = discrete_quotient(&form, &s).unwrap();
        worst_translate = worst_translate.max((qk - q0).abs() / q0);
    }
    assert!(worst_translate <= 1e-10, "translation drift {worst_translate}");
    let mut worst_scale: f64 = 0.0;
    for c in [3.0, -0.125, 1e5] {
        let mut s = w.clone();
        s.scale(c);
        let qc = discrete_quotient(&form, &s).unwrap();
        worst_scale = worst_scale.max((qc - q0).abs() / q0);
    }
    assert!(worst_scale <= 1e-12, "scaling drift {worst_scale}");
    println!(
        "[PASS] A9 monotonicity and invariances: nondecreasing in lambda; translation drift {worst_translate:.2e} <= 1e-10, scaling drift {worst_scale:.2e} <= 1e-12"
    );
}

#[test]
fn a10_critical_symmetry_breaking_margin() {
    // computed radial value at (5, 0, 10, 1) must exceed the unweighted
    // critical constant by more than 3x the combined numeric tolerance
    let p = ProblemParams::new(5, 0.0, 10.0, 1.0).unwrap();
    let p0 = ProblemParams::new(5, 0.0, 10.0, 0.0).unwrap();
    let quad = RadialQuadSpec::default();
    let s_star = quotient_of_u(&p0, &quad).unwrap();

    let form = reduce_fourth_order(&p).unwrap();
    let budget = SolverConfig::default();
    let coarse = solve_fourth(&form, &budget).unwrap();
    let mut fine_cfg = budget;
    fine_cfg.grid = Some(coarse.profile.grid().refined());
    let fine = solve_fourth(&form, &fine_cfg).unwrap();
    assert!(coarse.converged && fine.converged);

    let solve_tol = 2.0 * (fine.infimum - coarse.infimum).abs() / 3.0
        + 10.0 * budget.el_tolerance * fine.infimum;
    let quad_tol = 1e-8 * s_star;
    let margin = fine.infimum - s_star;
    let combined = solve_tol + quad_tol;
    assert!(
        margin > 3.0 * combined,
        "margin {margin} vs 3x tolerance {}",
        3.0 * combined
    );
    println!(
        "[PASS] A10 critical symmetry breaking: margin {margin:.4} > 3 x combined tolerance {:.2e}",
        combined
    );
}

#[test]
fn a11_bump_decay_and_scaling() {
    // strictly decreasing over delta in {0.4, 0.2, 0.1} and log-log slope
    // within 10% of the frozen-weight exponent
    let p = ProblemParams::new(5, 0.0, 4.0, 0.0).unwrap();
    let deltas = [0.4, 0.2, 0.1];
    let mut vals = Vec::new();
    for d in deltas {
        vals.push(bump_quotient(&p, &BumpSpec::new(d).unwrap()).unwrap());
    }
    assert!(vals[0] > vals[1] && vals[1] > vals[2], "not decreasing: {vals:?}");
    let slope = (vals[0] / vals[2]).ln() / (deltas[0] / deltas[2]).ln();
    let expo = bump_scaling_exponent(&p);
    let rel = (slope - expo).abs() / expo;
    assert!(rel <= 0.1, "slope {slope} vs exponent {expo}");
    println!(
        "[PASS] A11 bump decay: values decreasing, log-log slope {slope:.4} within {:.1}% of exponent {expo}",
        rel * 100.0
    );
}

#[test]
fn a12_limiting_profile_continuation() {
    // eps continuation at (5, 0, 3): gaps decreasing, final gap <= 1e-2
    // relative; final H1 distance to the soliton <= 0.05 relative
    let p = ProblemParams::new(5, 0.0, 3.0, 0.0).unwrap();
    let cfg = SolverConfig::with_grid(40.0, 4096).unwrap();
    let run = limiting_profile_run(&p, &[1.0, 0.1, 0.01, 0.001], &cfg).unwrap();
    assert!(!run.degraded);
    let gaps: Vec<f64> = run
        .records
        .iter()
        .map(|r| (r.s_tilde - run.limit.infimum) / run.limit.infimum)
        .collect();
    for pair in gaps.windows(2) {
        assert!(pair[1] > 0.0 && pair[1] < pair[0], "gaps not decreasing: {gaps:?}");
    }
    let final_gap = *gaps.last().unwrap();
    assert!(final_gap <= 1e-2, "final gap {final_gap}");

    let mut sol = Profile1D::from_fn(run.limit.profile.grid(), |t| {
        0.375 / (t / 4.0).cosh().powi(2)
    })
    .unwrap();
    sol.normalize_lq(3.0).unwrap();
    let final_prof = &run.records.last().unwrap().profile;
    let dist = final_prof.h1_distance(&sol) / sol.h1_norm();
    assert!(dist <= 0.05, "final H1 distance {dist}");
    println!(
        "[PASS] A12 limiting profile: gaps decreasing, final gap {final_gap:.2e} <= 1e-2, H1 distance to soliton {dist:.2e} <= 0.05"
    );
}

#[test]
fn a13_normalization_relation() {
    // lambda * S_tilde(1/lambda) = S(lambda) to 1e-10 at (5, 0, 4)
    let mut worst: f64 = 0.0;
    for lambda in [1.0, 10.0, 100.0] {
        let p = ProblemParams::new(5, 0.0, 4.0, lambda).unwrap();
        let cfg = SolverConfig::with_grid(40.0, 4096).unwrap();
        let tilde = solve_eps_radial(&p, 1.0 / lambda, &cfg, None).unwrap();
        let full = solve_fourth(&reduce_fourth_order(&p).unwrap(), &cfg).unwrap();
        assert!(tilde.converged && full.converged);
        let rel = (tilde.infimum * lambda - full.infimum).abs() / full.infimum;
        worst = worst.max(rel);
        assert!(rel <= 1e-10, "lambda={lambda}: {rel}");
    }
    println!("[PASS] A13 normalization relation: worst relative mismatch {worst:.2e} <= 1e-10");
}

#[test]
fn sanity_omega_factor_cancels_in_cross_pipeline() {
    // the two acceptance pipelines of A5 share omega_n bookkeeping; pin
    // the sphere factor itself once here
    let p = ProblemParams::new(5, 0.0, 10.0, 0.0).unwrap();
    let form = reduce_fourth_order(&p).unwrap();
    let omega = omega_n(5);
    let expect = omega.powf(0.8);
    let got = form.sphere_factor();
    assert!((got - expect).abs() / expect < 1e-14);
}
