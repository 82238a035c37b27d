use rellich_core::params::ProblemParams;
use rellich_core::quadrature::{bump_energies, BumpSpec};

fn main() {
    let p = ProblemParams::new(5, 0.0, 4.0, 1.0).unwrap();
    println!("delta    e2(grad)     e4(bilap)    lq_mass      Q0           Q_eps(1e-4)");
    for delta in [0.4, 0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625] {
        let e = bump_energies(&p, &BumpSpec::new(delta).unwrap()).unwrap();
        let q0 = e.gradient / e.lq_mass.powf(0.5);
        let qe = (1e-4 * e.bilaplacian + e.gradient) / e.lq_mass.powf(0.5);
        println!(
            "{delta:<8} {:<12.5e} {:<12.5e} {:<12.5e} {q0:<12.6} {qe:<12.6}",
            e.gradient, e.bilaplacian, e.lq_mass
        );
    }
}
