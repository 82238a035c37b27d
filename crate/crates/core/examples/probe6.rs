use rellich_core::params::ProblemParams;
use rellich_core::solvers::SolverConfig;
use rellich_core::symmetry::verdict_at;

fn main() {
    for (q, l) in [(6.0, 1.0e2), (6.0, 1.0e3), (6.0, 1.0e4), (6.0, 1.0e5), (8.0, 1.0e2), (8.0, 1.0e3)] {
        let p = ProblemParams::new(5, 0.0, q, l).unwrap();
        let v = verdict_at(&p, &SolverConfig::default()).unwrap();
        println!(
            "q={q} l={l:<8}: {} margin={:?} fired={:?}",
            v.verdict.as_str(),
            v.margin.map(|x| format!("{x:+.3e}")),
            v.criteria_fired.iter().map(|c| c.kind.as_str()).collect::<Vec<_>>()
        );
    }
}
