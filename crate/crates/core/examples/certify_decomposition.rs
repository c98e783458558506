//! Upper bounds from explicit decompositions, next to the lower bound.
//!
//! cargo run --example certify_decomposition

use std::f64::consts::TAU;

use tanglebound::bound::{certify_decomposition, ghz_w_mixture, noisy_ghz_fidelity_ratio, Decomposition};
use tanglebound::charcurve::{restricted_bound_analytic, z_state, GhzwPoint};
use tanglebound::qstate::{Measure, NamedState};

fn main() -> tanglebound::Result<()> {
    for p in [0.5, 0.7, 0.85, 0.95] {
        let rho = ghz_w_mixture(p);
        // three phases 2 pi k / 3 cancel the GHZ-W coherences
        let states = (0..3)
            .map(|k| Ok(z_state(GhzwPoint::new(p, TAU * k as f64 / 3.0)?)))
            .collect::<tanglebound::Result<Vec<_>>>()?;
        let phased = Decomposition::new(vec![1.0 / 3.0; 3], states)?;
        let trivial = Decomposition::new(vec![p, 1.0 - p], vec![NamedState::Ghz.state(), NamedState::W.state()])?;
        let a = certify_decomposition(&phased, &rho, Measure::Tau3);
        let b = certify_decomposition(&trivial, &rho, Measure::Tau3);
        println!(
            "p = {p:.2}: lower {:.6} <= three phases {:.6} (residual {:.1e}), GHZ + W {:.6}",
            restricted_bound_analytic(p)?,
            a.upper_bound,
            a.residual,
            b.upper_bound
        );
    }

    let (num, den) = noisy_ghz_fidelity_ratio(5, 7)?;
    println!("noisy GHZ at gamma = 5/7 has fidelity {num}/{den}");
    Ok(())
}
