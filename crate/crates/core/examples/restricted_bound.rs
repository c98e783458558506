//! The dual bound on mixtures of GHZ and W, searched only over their span,
//! against the analytic convex roof. Prints the seesaw trace at p = 0.85.
//!
//! cargo run --release --example restricted_bound

use tanglebound::bound::{BoundProblem, LegendreSolver, SearchSpace};
use tanglebound::charcurve::restricted_bound_analytic;
use tanglebound::qstate::{Measure, NamedState};

fn main() -> tanglebound::Result<()> {
    let ghz = NamedState::Ghz.state();
    // witness 1/2 - |GHZ><GHZ|, measured value 1/2 - p
    let problem = BoundProblem::projector(&ghz, 0.5, 0.5, Measure::Tau3, SearchSpace::ghz_w_span())?;
    let solver = LegendreSolver::new(&problem)?;

    println!("{:>5} {:>10} {:>10} {:>8}", "p", "epsilon", "exact", "r*");
    for i in 0..=10 {
        let p = i as f64 / 10.0;
        let r = solver.solve(&[0.5 - p])?;
        println!("{p:>5.2} {:>10.6} {:>10.6} {:>8.4}", r.epsilon, restricted_bound_analytic(p)?, r.r_star[0]);
    }

    let r = solver.solve(&[0.5 - 0.85])?;
    println!("\nseesaw at p = 0.85 ({} dual evaluations)", r.trace.len());
    for e in r.trace.iter().step_by(8) {
        println!("  r = {:>9.4}  g(r) = {:>9.6}", e.r[0], e.value);
    }
    Ok(())
}
