//! The `verify` command: re-runs the invariant suite (constant
//! identities, mode-symbol consistency, sign patterns, reduction
//! cross-checks, energy identities, soliton oracles, cross-pipeline
//! agreement, normalization relation, bump decay) and reports one
//! PASS/FAIL line per check.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use rellich_core::asymptotics::solve_eps_radial;
use rellich_core::emden_fowler::{reduce_fourth_order, reduce_second_order};
use rellich_core::exact;
use rellich_core::gamma::gamma_alpha_numeric;
use rellich_core::params::ProblemParams;
use rellich_core::quadrature::{
    bump_quotient, bump_scaling_exponent, quotient_of_u, reduction_cross_check,
    verify_ab_identities, verify_weight_shift_identity, BumpSpec, CompactBump, Curve1D,
    GaussCurve, GaussianRing, ModulatedGaussCurve, RadialQuadSpec, SechCurve,
};
use rellich_core::solvers::{solve_fourth, solve_second, SolverConfig};

use crate::{CliError, VerifyArgs};

struct Check {
    name: &'static str,
    pass: bool,
    measured: f64,
    threshold: f64,
    detail: String,
}

fn check_constant_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut exact_ok = true;
    for _ in 0..1000 {
        let n: u32 = rng.gen_range(5..=10);
        let alpha: f64 = rng.gen_range((4.0 - n as f64) + 1e-3..n as f64 - 1e-3);
        let lambda: f64 = rng.gen_range(-5.0..5.0);
        let (ar, lr) = (exact::rat(alpha), exact::rat(lambda));
        let a = exact::a_lambda(n, &ar, &lr);
        let b = exact::b_lambda(n, &ar, &lr);
        let t = exact::rat(n as f64 - 2.0) * (&ar - exact::rat(2.0)) / exact::rat(2.0)
            - &lr / exact::rat(2.0);
        exact_ok &= (&a * &a - &b) == (&t * &t);
        exact_ok &= b == exact::delta_alpha(n, &ar) + &lr * exact::h_tilde_alpha(n, &ar);
        let (af, bf) = (exact::to_f64(&a), exact::to_f64(&b));
        let rhs = ((n as f64 - 2.0) * (alpha - 2.0) / 2.0 - lambda / 2.0).powi(2);
        worst = worst.max((af * af - bf - rhs).abs() / rhs.abs().max(1.0));
    }
    Check {
        name: "constant_identities",
        pass: exact_ok && worst <= 1e-12,
        measured: worst,
        threshold: 1e-12,
        detail: "square and affine identities, 1000 random points".into(),
    }
}

fn check_mode_symbol_consistency() -> Check {
    let mut ok = true;
    let mut count = 0;
    for n in [5u32, 6, 7] {
        let k_max = 20 * (2 * n as i64 - 4);
        for k in 1..k_max {
            let alpha = exact::rat(4.0 - n as f64) + exact::rat_int(k) / exact::rat_int(20);
            let c0 = exact::mode_c(n, &alpha, 0);
            ok &= (&c0 * &c0) == exact::delta_alpha(n, &alpha);
            let t = &alpha - exact::rat(2.0);
            ok &= (-(&c0 + &c0) + &t * &t) == exact::rat(2.0) * exact::delta_tilde_alpha(n, &alpha);
            count += 1;
        }
    }
    Check {
        name: "mode_symbol_consistency",
        pass: ok,
        measured: if ok { 0.0 } else { 1.0 },
        threshold: 0.0,
        detail: format!("exact rational equality at {count} grid points"),
    }
}

fn check_lambda_alpha_signs() -> Check {
    let mut ok = true;
    for n in 5u32..=10 {
        let k_max = 20 * (2 * n as i64 - 4);
        for k in 1..k_max {
            let alpha = exact::rat(4.0 - n as f64) + exact::rat_int(k) / exact::rat_int(20);
            let la = exact::lambda_alpha(n, &alpha);
            let a_f = exact::to_f64(&alpha);
            if a_f == 0.0 || a_f == 4.0 {
                ok &= exact::is_zero(&la);
            } else if a_f > 0.0 && a_f < 4.0 {
                ok &= exact::is_positive(&(-la.clone()));
                ok &= exact::is_positive(&(la + exact::gamma_alpha_formula(n, &alpha)));
            } else {
                ok &= exact::is_positive(&la);
            }
        }
    }
    Check {
        name: "lambda_alpha_sign_pattern",
        pass: ok,
        measured: if ok { 0.0 } else { 1.0 },
        threshold: 0.0,
        detail: "threshold signs and lower bound, 0.05 grid, n in 5..=10".into(),
    }
}

fn check_gamma_scan() -> Check {
    let mut worst: f64 = 0.0;
    for n in [5u32, 6, 7] {
        for alpha in [0.0, 1.0, 2.0, 3.0] {
            let p = ProblemParams::new(n, alpha, 3.0, 0.0).unwrap();
            let scan = gamma_alpha_numeric(&p, 64, 1e-8).unwrap();
            let formula = (n as f64 - alpha).powi(2) / 4.0;
            worst = worst.max((scan.infimum - formula).abs() / formula);
        }
    }
    Check {
        name: "gamma_scan_vs_formula",
        pass: worst <= 1e-8,
        measured: worst,
        threshold: 1e-8,
        detail: "mode scan against (n-alpha)^2/4, alpha in {0..3}, n in {5,6,7}".into(),
    }
}

fn check_reduction_cross_checks() -> Check {
    let quad = RadialQuadSpec::default();
    let p = ProblemParams::new(5, 0.5, 3.0, 0.0).unwrap();
    let curves: [&dyn Curve1D; 3] = [
        &GaussCurve,
        &SechCurve { k: 1.0 },
        &ModulatedGaussCurve { freq: 2.0 },
    ];
    let mut worst: f64 = 0.0;
    for c in curves {
        match reduction_cross_check(&p, c, 20.0, 4097, &quad) {
            Ok(chk) => worst = worst.max(chk.max_rel_err),
            Err(_) => worst = f64::INFINITY,
        }
    }
    Check {
        name: "reduction_cross_checks",
        pass: worst <= 1e-6,
        measured: worst,
        threshold: 1e-6,
        detail: "n-dimensional vs 1D quadrature of the three forms".into(),
    }
}

fn check_shifted_energy_identities() -> Check {
    let quad = RadialQuadSpec::default();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in [5u32, 6, 7] {
        for alpha in [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0] {
            if ProblemParams::new(n, alpha, 3.0, 0.0).is_err() {
                continue;
            }
            match verify_ab_identities(n, alpha, &quad) {
                Ok(rep) => worst = worst.max(rep.max_rel_err),
                Err(_) => worst = f64::INFINITY,
            }
            count += 1;
        }
    }
    Check {
        name: "shifted_energy_identities",
        pass: worst <= 1e-6,
        measured: worst,
        threshold: 1e-6,
        detail: format!("both sides by quadrature at {count} admissible points"),
    }
}

fn check_weight_shift_identity() -> Check {
    let quad = RadialQuadSpec::default();
    let ring = GaussianRing { center: 1.0, width: 0.25 };
    let bump = CompactBump { center: 1.0, radius: 0.5 };
    let mut worst: f64 = 0.0;
    for n in [5u32, 6, 7] {
        for alpha in [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0] {
            for w in [&ring as &dyn rellich_core::quadrature::RadialCurve, &bump] {
                match verify_weight_shift_identity(n, alpha, w, &quad) {
                    Ok(e) => worst = worst.max(e),
                    Err(_) => worst = f64::INFINITY,
                }
            }
        }
    }
    Check {
        name: "weight_shift_identity",
        pass: worst <= 1e-8,
        measured: worst,
        threshold: 1e-8,
        detail: "six-term expansion vs direct quadrature, two profiles".into(),
    }
}

fn check_soliton_oracles() -> Check {
    let mut worst: f64 = 0.0;
    let cases = [(0.25, 3.0, 40.0), (1.0, 4.0, 30.0)];
    for (h, q, half) in cases {
        let form = rellich_core::emden_fowler::ReducedForm::second_raw(h, q, 1.0).unwrap();
        let cfg = SolverConfig::with_grid(half, 4096).unwrap();
        match solve_second(&form, &cfg) {
            Ok(r) => {
                let pexp = 2.0 / (q - 2.0);
                let b = h.sqrt() / pexp;
                let a = (b * b * pexp * (pexp + 1.0)).powf(1.0 / (q - 2.0));
                // closed-form mass of the soliton via its equation
                let grid = r.profile.grid();
                let hstep = grid.spacing();
                let mass: f64 = hstep
                    * grid
                        .nodes()
                        .map(|t| (a * (1.0 / (b * t).cosh()).powf(pexp)).powf(q))
                        .sum::<f64>();
                let oracle = mass.powf((q - 2.0) / q);
                worst = worst.max((r.infimum_unscaled - oracle).abs() / oracle);
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    Check {
        name: "soliton_oracles",
        pass: worst <= 1e-4,
        measured: worst,
        threshold: 1e-4,
        detail: "second-order solves vs the analytic soliton family".into(),
    }
}

fn check_cross_pipeline() -> Check {
    let p = ProblemParams::new(5, 0.0, 10.0, 0.0).unwrap();
    let measured = (|| -> Result<f64, CliError> {
        let r = solve_fourth(&reduce_fourth_order(&p)?, &SolverConfig::default())?;
        let quad = quotient_of_u(&p, &RadialQuadSpec::default())?;
        Ok((r.infimum - quad).abs() / quad)
    })()
    .unwrap_or(f64::INFINITY);
    Check {
        name: "cross_pipeline_critical_constant",
        pass: measured <= 1e-3,
        measured,
        threshold: 1e-3,
        detail: "reduced solve vs extremal-profile quadrature at (5,0,10,0)".into(),
    }
}

fn check_normalization_relation() -> Check {
    let mut worst: f64 = 0.0;
    for lambda in [1.0, 10.0] {
        let p = ProblemParams::new(5, 0.0, 4.0, lambda).unwrap();
        let cfg = SolverConfig::with_grid(40.0, 2048).unwrap();
        let rel = (|| -> Result<f64, CliError> {
            let tilde = solve_eps_radial(&p, 1.0 / lambda, &cfg, None)?;
            let full = solve_fourth(&reduce_fourth_order(&p)?, &cfg)?;
            Ok((tilde.infimum * lambda - full.infimum).abs() / full.infimum)
        })()
        .unwrap_or(f64::INFINITY);
        worst = worst.max(rel);
    }
    Check {
        name: "normalization_relation",
        pass: worst <= 1e-10,
        measured: worst,
        threshold: 1e-10,
        detail: "lambda * S_tilde(1/lambda) vs S(lambda), lambda in {1,10}".into(),
    }
}

fn check_bump_decay() -> Check {
    let p = ProblemParams::new(5, 0.0, 4.0, 0.0).unwrap();
    let res = (|| -> Result<(bool, f64), CliError> {
        let deltas = [0.4, 0.2, 0.1];
        let mut vals = Vec::new();
        for d in deltas {
            vals.push(bump_quotient(&p, &BumpSpec::new(d)?)?);
        }
        let decreasing = vals[0] > vals[1] && vals[1] > vals[2];
        let slope = (vals[0] / vals[2]).ln() / (deltas[0] / deltas[2]).ln();
        let expo = bump_scaling_exponent(&p);
        Ok((decreasing, (slope - expo).abs() / expo))
    })();
    let (decreasing, rel) = res.unwrap_or((false, f64::INFINITY));
    Check {
        name: "bump_decay",
        pass: decreasing && rel <= 0.1,
        measured: rel,
        threshold: 0.1,
        detail: "decreasing in delta; log-log slope vs frozen-weight exponent".into(),
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let checks: Vec<fn() -> Check> = vec![
        check_constant_identities,
        check_mode_symbol_consistency,
        check_lambda_alpha_signs,
        check_gamma_scan,
        check_reduction_cross_checks,
        check_shifted_energy_identities,
        check_weight_shift_identity,
        check_soliton_oracles,
        check_cross_pipeline,
        check_normalization_relation,
        check_bump_decay,
    ];
    let results: Vec<Check> = checks.par_iter().map(|f| f()).collect();

    let mut all_pass = true;
    for c in &results {
        all_pass &= c.pass;
        println!(
            "[{}] {}: measured {:.3e} vs threshold {:.1e} — {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.threshold,
            c.detail
        );
    }

    let payload = json!({
        "all_pass": all_pass,
        "checks": results
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "pass": c.pass,
                    "measured": c.measured,
                    "threshold": c.threshold,
                    "detail": c.detail,
                })
            })
            .collect::<Vec<Value>>(),
    });
    if let Some(path) = &args.out {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(path, crate::json::to_canonical_string(&payload))?;
    }
    if all_pass {
        println!("verify: all {} checks passed", results.len());
        Ok(())
    } else {
        Err(CliError::NonConvergence("verification failed".into()))
    }
}
