//! Three-tangle of reference states and of a locally rotated GHZ state.
//!
//! cargo run --example three_tangle

use nalgebra::Matrix2;
use num_complex::Complex64;
use tanglebound::qstate::{apply_local_unitary, three_tangle, NamedState};

fn rotation(theta: f64, phase: f64) -> Matrix2<Complex64> {
    let (c, s) = (theta.cos(), theta.sin());
    let e = Complex64::from_polar(1.0, phase);
    Matrix2::new(Complex64::new(c, 0.0), -s * e.conj(), s * e, Complex64::new(c, 0.0))
}

fn main() -> tanglebound::Result<()> {
    for (name, state) in [
        ("GHZ", NamedState::Ghz.state()),
        ("W", NamedState::W.state()),
        ("W-bar", NamedState::WBar.state()),
        ("|000>", NamedState::Basis(0).state()),
    ] {
        let t = three_tangle(&state);
        println!("{name:>6}: tau3 = {:.12}  d1 = {:.4}  d2 = {:.4}  d3 = {:.4}", t.tau3, t.d1, t.d2, t.d3);
    }

    let rotated = apply_local_unitary(&NamedState::Ghz.state(), &rotation(0.3, 1.1), &rotation(-0.7, 0.2), &rotation(1.9, -2.5))?;
    println!("rotated GHZ: tau3 = {:.12}", three_tangle(&rotated).tau3);
    Ok(())
}
