//! How an off-diagonal admixture in the witness degrades the bound on tau3^2.
//!
//! cargo run --release --example skew_witness

use tanglebound::bound::{BoundProblem, LegendreSolver, SearchSpace};
use tanglebound::charcurve::skew_characteristic;
use tanglebound::qstate::Measure;

fn main() -> tanglebound::Result<()> {
    let omegas = [-1.0, -0.25, 0.0, 0.25, 1.0];
    let ps: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();

    print!("{:>5}", "p");
    for w in omegas {
        print!(" {:>9}", format!("w={w}"));
    }
    println!();
    let mut columns = Vec::new();
    for omega in omegas {
        let problem = BoundProblem::skew(omega, 0.5, Measure::Tau3Sq, SearchSpace::ghz_w_span())?;
        let solver = LegendreSolver::new(&problem)?;
        columns.push(ps.iter().map(|p| solver.solve(&[-p]).map(|r| r.epsilon)).collect::<Result<Vec<_>, _>>()?);
    }
    for (i, p) in ps.iter().enumerate() {
        print!("{p:>5.1}");
        for c in &columns {
            print!(" {:>9.5}", c[i]);
        }
        println!();
    }

    // the pure-state minimum on the constraint set, before convexification
    let (v, phi) = skew_characteristic(0.9, 1.0, Measure::Tau3Sq)?;
    println!("\nomega = 1, p = 0.9: min tau3^2 on the constraint = {v:.6} at phi = {phi:.4}");
    Ok(())
}
