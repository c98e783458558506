//! The dual bound against the convex hull of the constrained pure-state
//! minimum, for the GHZ-W problem and the skew witness.
//!
//! cargo run --release --example equivalence

use tanglebound::bound::{equivalence_report, BoundProblem, SearchSpace};
use tanglebound::qstate::{Measure, NamedState};

fn main() -> tanglebound::Result<()> {
    let ghz = NamedState::Ghz.state();
    let restricted = BoundProblem::projector(&ghz, 0.5, 0.5, Measure::Tau3, SearchSpace::ghz_w_span())?;
    let grid: Vec<f64> = (0..41).map(|i| 0.5 - i as f64 / 40.0).collect();
    let report = equivalence_report(&restricted, &grid)?;
    println!("GHZ witness: max discrepancy {:.2e} at w = {:.3}", report.max_discrepancy, report.worst_at);

    let skew = BoundProblem::skew(1.0, 0.5, Measure::Tau3, SearchSpace::ghz_w_span())?;
    let grid: Vec<f64> = (0..41).map(|i| -(i as f64) / 40.0).collect();
    let report = equivalence_report(&skew, &grid)?;
    println!("skew witness: max discrepancy {:.2e} at w = {:.3}", report.max_discrepancy, report.worst_at);
    for ((w, l), c) in report.grid.iter().zip(&report.legendre).zip(&report.convexified).step_by(5) {
        println!("  p = {:.3}: dual {l:.6}  hull {:.6}", -w, c.max(0.0));
    }
    Ok(())
}
