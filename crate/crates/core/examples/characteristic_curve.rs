//! The characteristic curve tau3(q, 0) of the GHZ-W superpositions, the
//! constants of its convex hull, and the hull itself.
//!
//! cargo run --example characteristic_curve

use tanglebound::charcurve::{benchmarks, restricted_bound_analytic, tau3_diagonal};
use tanglebound::envelope::{convexity_diagnostic, lower_convex_envelope, SampledCurve};

fn main() -> tanglebound::Result<()> {
    let b = benchmarks()?;
    println!("q0 = {:.12}  r0 = {:.6}", b.q0, b.r0);
    println!("q1 = {:.12}  r1 = {:.6}", b.q1, b.r1);

    // the hull kinks sit at q0 and q1, so sample them exactly
    let mut qs: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    qs.extend([b.q0, b.q1]);
    qs.sort_by(f64::total_cmp);
    let curve = SampledCurve::from_fn(qs, tau3_diagonal)?;
    let hull = lower_convex_envelope(&curve);
    println!("affine pieces of the sampled hull: {:?}", hull.affine_regions());
    println!("{:>6} {:>10} {:>10} {:>10}", "q", "tau3", "hull", "exact");
    for ((q, v), h) in curve.points().zip(hull.values()) {
        println!("{q:>6.3} {v:>10.6} {h:>10.6} {:>10.6}", restricted_bound_analytic(q)?);
    }

    let fine = SampledCurve::from_fn((0..=400).map(|i| 0.8 + 0.2 * i as f64 / 400.0).collect(), tau3_diagonal)?;
    for (a, z) in convexity_diagnostic(&fine, 1e-9)?.nonconvex {
        println!("concave on [{a:.4}, {z:.4}]");
    }
    Ok(())
}
