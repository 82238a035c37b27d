use rellich_core::emden_fowler::{reduce_fourth_order};
use rellich_core::params::ProblemParams;
use rellich_core::quadrature::{quotient_of_u, RadialQuadSpec};
use rellich_core::solvers::{solve_fourth, SolverConfig};
use std::time::Instant;

fn main() {
    let p = ProblemParams::new(5, 0.0, 10.0, 0.0).unwrap();
    let form = reduce_fourth_order(&p).unwrap();
    let t0 = Instant::now();
    let quad = quotient_of_u(&p, &RadialQuadSpec::default()).unwrap();
    println!("quotient_of_U = {quad:.10} ({:?})", t0.elapsed());

    for (l, n) in [(80.0, 4096usize), (80.0, 8192), (80.0, 16384)] {
        let cfg = SolverConfig::with_grid(l, n).unwrap();
        let t0 = Instant::now();
        let r = solve_fourth(&form, &cfg).unwrap();
        println!(
            "solve_fourth L={l} N={n}: inf={:.10} rel_to_quad={:+.3e} residual={:.2e} iters={} conv={} ({:?})",
            r.infimum,
            (r.infimum - quad) / quad,
            r.el_residual,
            r.iterations,
            r.converged,
            t0.elapsed()
        );
    }
}
