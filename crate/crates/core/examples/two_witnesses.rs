//! Two witnesses at once: data compatible with the W state gives no bound,
//! and the same problem as the JSON accepted by `tanglebound bound`.
//!
//! cargo run --release --example two_witnesses

use tanglebound::bound::{legendre_bound, BoundProblem, OptimizerSettings, SearchSpace};
use tanglebound::charcurve::restricted_bound_analytic;
use tanglebound::qstate::{Measure, NamedState, Observable};

fn main() -> tanglebound::Result<()> {
    let witnesses = vec![
        Observable::projector(&NamedState::Ghz.state()),
        Observable::projector(&NamedState::W.state()),
    ];
    let problem = BoundProblem::new(witnesses.clone(), vec![0.0, 1.0], Measure::Tau3, SearchSpace::Full, OptimizerSettings::default())?;
    let r = legendre_bound(&problem)?;
    println!("<GHZ> = 0, <W> = 1, all states: epsilon = {:.6}, {:?}", r.epsilon, r.status);

    // <GHZ> + <W> = 1 pins the state to the GHZ-W span
    let problem = BoundProblem::new(witnesses.clone(), vec![0.9, 0.1], Measure::Tau3, SearchSpace::ghz_w_span(), OptimizerSettings::default())?;
    let r = legendre_bound(&problem)?;
    println!(
        "<GHZ> = 0.9, <W> = 0.1, span: epsilon = {:.6} (one-witness roof {:.6}), r* = [{:.4}, {:.4}]",
        r.epsilon,
        restricted_bound_analytic(0.9)?,
        r.r_star[0],
        r.r_star[1]
    );

    let problem = BoundProblem::new(witnesses, vec![0.0, 1.0], Measure::Tau3, SearchSpace::Full, OptimizerSettings::default())?;
    println!("\n{}", serde_json::to_string(&problem)?);
    Ok(())
}
