use rellich_core::params::ProblemParams;
use rellich_core::solvers::SolverConfig;
use rellich_core::symmetry::{phase_scan, verdict_at, MemoryCache};
use std::time::Instant;

fn main() {
    let budget = SolverConfig::default();
    for (n, a, q, l) in [
        (5u32, 0.0, 4.0, 1.0e4),
        (5, 0.0, 4.0, 1.0e5),
        (5, 0.0, 10.0, 1.0),
        (5, 2.0, 10.0, -1.4),
        (5, 2.0, 10.0, 0.0),
        (5, 3.0, 3.0, 1.0),
    ] {
        let p = ProblemParams::new(n, a, q, l).unwrap();
        let t0 = Instant::now();
        match verdict_at(&p, &budget) {
            Ok(v) => {
                let crits: Vec<String> = v
                    .criteria_fired
                    .iter()
                    .map(|c| format!("{}(m={:.3e},tol={:.1e},ll={})", c.kind.as_str(), c.margin, c.tolerance, c.lambda_large_only))
                    .collect();
                println!(
                    "({n},{a},{q},{l}): {} s_up={:?} s_rad={:?} margin={:?} [{}] ({:?})",
                    v.verdict.as_str(),
                    v.s_upper_bound.map(|x| format!("{x:.6}")),
                    v.s_radial.map(|x| format!("{x:.6}")),
                    v.margin.map(|x| format!("{x:.3e}")),
                    crits.join(", "),
                    t0.elapsed()
                );
            }
            Err(e) => println!("({n},{a},{q},{l}): ERROR {e}"),
        }
    }

    // scan cost: 5 alphas x 5 qs x 3 lambdas at n=5
    let mut pts = Vec::new();
    for ia in -2..=2 {
        let alpha = 0.1 * ia as f64;
        for iq in 0..5 {
            let q = if iq == 4 { 10.0 } else { 9.0 + 0.25 * iq as f64 };
            for lambda in [1.0, 10.0, 100.0] {
                pts.push(ProblemParams::new(5, alpha, q, lambda).unwrap());
            }
        }
    }
    let cache = MemoryCache::default();
    let t0 = Instant::now();
    let (vs, stats) = phase_scan(&pts, &budget, Some(&cache));
    println!("scan of {} points: {:?} stats={stats:?}", vs.len(), t0.elapsed());
    let fired = vs.iter().filter(|v| v.verdict.as_str() == "radial_breaks_certified").count();
    println!("certified: {fired}");
    for v in vs.iter().filter(|v| v.params.q == 10.0 && v.params.alpha == 0.0) {
        println!("  critical col: l={} -> {}", v.params.lambda, v.verdict.as_str());
    }
}
