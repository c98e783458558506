//! Bound on the three-tangle from the GHZ fidelity alone, over all
//! three-qubit pure states, at the fidelities of three experiments.
//!
//! cargo run --release --example fidelity_bound

use tanglebound::bound::{fidelity_curve, OptimizerSettings, SearchSpace};
use tanglebound::qstate::Measure;

fn main() -> tanglebound::Result<()> {
    let experiments = [(0.86, 0.03), (0.87, 0.06), (0.979, 0.002)];
    let ps: Vec<f64> = experiments.iter().flat_map(|&(p, d)| [p - d, p, p + d]).collect();
    let results = fidelity_curve(&ps, Measure::Tau3, SearchSpace::Full, &OptimizerSettings::default())?;

    println!("{:>6} {:>6} {:>9} {:>19} {:>9}", "p", "dp", "epsilon", "interval", "|r*| dp");
    for (k, &(p, d)) in experiments.iter().enumerate() {
        let (lo, mid, hi) = (&results[3 * k], &results[3 * k + 1], &results[3 * k + 2]);
        println!(
            "{p:>6.3} {d:>6.3} {:>9.4} [{:>7.4}, {:>7.4}] {:>9.4}",
            mid.epsilon,
            lo.epsilon,
            hi.epsilon,
            mid.r_star[0].abs() * d
        );
    }
    Ok(())
}
