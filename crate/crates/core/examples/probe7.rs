use rellich_core::asymptotics::solve_eps_radial;
use rellich_core::emden_fowler::reduce_fourth_order;
use rellich_core::params::ProblemParams;
use rellich_core::solvers::{solve_fourth, SolverConfig};

fn main() {
    for lambda in [1.0, 10.0, 100.0] {
        let p = ProblemParams::new(5, 0.0, 4.0, lambda).unwrap();
        let cfg = SolverConfig::with_grid(40.0, 4096).unwrap();
        let tilde = solve_eps_radial(&p, 1.0 / lambda, &cfg, None).unwrap();
        let full = solve_fourth(&reduce_fourth_order(&p).unwrap(), &cfg).unwrap();
        println!(
            "lambda={lambda}: tilde conv={} res={:.2e} iters={} | full conv={} res={:.2e} iters={}",
            tilde.converged, tilde.el_residual, tilde.iterations,
            full.converged, full.el_residual, full.iterations
        );
    }
}
