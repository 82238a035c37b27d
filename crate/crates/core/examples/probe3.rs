use rellich_core::asymptotics::{limiting_profile_run, solve_eps_radial};
use rellich_core::emden_fowler::{reduce_fourth_order, Grid1D, Profile1D};
use rellich_core::params::ProblemParams;
use rellich_core::quadrature::{quotient_of_u, RadialQuadSpec};
use rellich_core::solvers::{solve_fourth, SolverConfig};
use std::time::Instant;

fn main() {
    // A12-scale continuation
    let p = ProblemParams::new(5, 0.0, 3.0, 0.0).unwrap();
    let cfg = SolverConfig::with_grid(40.0, 4096).unwrap();
    let t0 = Instant::now();
    let run = limiting_profile_run(&p, &[1.0, 0.1, 0.01, 0.001], &cfg).unwrap();
    println!("continuation ({:?}), degraded={}", t0.elapsed(), run.degraded);
    println!("  s_tilde(0) = {:.12}", run.limit.infimum);
    for r in &run.records {
        println!(
            "  eps={:<7} s_tilde={:.12} gap_rel={:.3e} h1_rel={:.4}",
            r.eps,
            r.s_tilde,
            (r.s_tilde - run.limit.infimum) / run.limit.infimum,
            r.h1_distance_to_limit
        );
    }
    // sech oracle distance
    let grid = run.limit.profile.grid();
    let mut oracle = Profile1D::from_fn(grid, |t| {
        0.375 / (t / 4.0).cosh().powi(2)
    })
    .unwrap();
    oracle.normalize_lq(3.0).unwrap();
    let final_prof = &run.records.last().unwrap().profile;
    let d = final_prof.h1_distance(&oracle) / oracle.h1_norm();
    println!("  final H1 rel distance to sech oracle: {d:.4e}");
    let d0 = run.limit.profile.h1_distance(&oracle) / oracle.h1_norm();
    println!("  limit-profile H1 rel distance to oracle: {d0:.4e}");

    // A13: lambda * S_tilde(1/lambda) vs S(lambda)
    for lambda in [1.0, 10.0, 100.0] {
        let p = ProblemParams::new(5, 0.0, 4.0, lambda).unwrap();
        let cfg = SolverConfig::with_grid(40.0, 4096).unwrap();
        let t0 = Instant::now();
        let tilde = solve_eps_radial(&p, 1.0 / lambda, &cfg, None).unwrap();
        let full = solve_fourth(&reduce_fourth_order(&p).unwrap(), &cfg).unwrap();
        let rel = (tilde.infimum * lambda - full.infimum).abs() / full.infimum;
        println!(
            "lambda={lambda:<6} tilde*l={:.14} full={:.14} rel={:.3e} ({:?})",
            tilde.infimum * lambda,
            full.infimum,
            rel,
            t0.elapsed()
        );
    }

    // A10: critical margin at (5, 0, 10, 1)
    let p = ProblemParams::new(5, 0.0, 10.0, 1.0).unwrap();
    let s_star = quotient_of_u(&ProblemParams::new(5, 0.0, 10.0, 0.0).unwrap(), &RadialQuadSpec::default()).unwrap();
    let form = reduce_fourth_order(&p).unwrap();
    let cfg = SolverConfig::default(); // default grid from decay
    let t0 = Instant::now();
    let r = solve_fourth(&form, &cfg).unwrap();
    println!(
        "critical: S_rad(1)={:.8} S**={:.8} margin_rel={:.4} grid L={} N={} ({:?})",
        r.infimum,
        s_star,
        (r.infimum - s_star) / s_star,
        r.profile.grid().half_length(),
        r.profile.grid().n_cells(),
        t0.elapsed()
    );
}
