//! Closed forms for the GHZ-W family `|Z(q, phi)> = sqrt(q)|GHZ> - e^{i phi} sqrt(1-q)|W>`.
//!
//! These are the analytic reference values the numerical solvers in
//! [`crate::bound`] are checked against. Nothing here calls an optimizer
//! except the one-dimensional phase scan in [`skew_characteristic`].

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::{Measure, NamedState, PureState};

/// `8 sqrt(6) / 9`, the coefficient of the W-admixture term.
pub fn tangle_coefficient() -> f64 {
    8.0 * 6f64.sqrt() / 9.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GhzwPoint {
    q: f64,
    phi: f64,
}

impl GhzwPoint {
    /// `q` must lie in `[0, 1]`; `phi` is wrapped into `[0, 2 pi)`.
    pub fn new(q: f64, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::invalid(format!("q = {q} outside [0, 1]")));
        }
        if !phi.is_finite() {
            return Err(Error::invalid("phase must be finite"));
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(Self { q, phi })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// The normalized state `sqrt(q)|GHZ> - e^{i phi} sqrt(1-q)|W>`.
pub fn z_state(point: GhzwPoint) -> PureState {
    let ghz = NamedState::Ghz.state();
    let w = NamedState::W.state();
    let a = Complex64::new(point.q.sqrt(), 0.0);
    let b = -Complex64::from_polar((1.0 - point.q).sqrt(), point.phi);
    PureState::superpose(a, &ghz, b, &w).expect("GHZ and W are orthonormal")
}

/// `|q^2 - (8 sqrt 6 / 9) sqrt(q (1-q)^3) e^{3 i phi}|`
pub fn tau3_closed_form(point: GhzwPoint) -> f64 {
    let GhzwPoint { q, phi } = point;
    let mixed = tangle_coefficient() * (q * (1.0 - q).powi(3)).sqrt();
    (Complex64::new(q * q, 0.0) - Complex64::from_polar(mixed, 3.0 * phi)).norm()
}

/// `tau3(q, 0)` without constructing a point.
pub fn tau3_diagonal(q: f64) -> f64 {
    signed_diagonal(q).abs()
}

// Argument of |.| at phi = 0: negative on (0, q0), positive on (q0, 1].
fn signed_diagonal(q: f64) -> f64 {
    q * q - tangle_coefficient() * q.sqrt() * (1.0 - q).powf(1.5)
}

fn signed_diagonal_slope(q: f64) -> f64 {
    2.0 * q - tangle_coefficient() * (1.0 - q).sqrt() * (1.0 - 4.0 * q) / (2.0 * q.sqrt())
}

/// Derivative of `tau3(q, 0)` in `q`.
///
/// The sign of the inner polynomial is tracked explicitly; at its zero `q0`
/// the right-sided derivative is returned. Undefined at `q = 0`.
pub fn tau3_diagonal_slope(q: f64) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::invalid(format!("slope of tau3(q,0) undefined at q = {q}")));
    }
    let slope = signed_diagonal_slope(q);
    let zero = q0();
    let sign = if q >= zero || (zero - q).abs() < 1e-14 { 1.0 } else { -1.0 };
    Ok(sign * slope)
}

/// Root of `tau3(q, 0)` inside `(0, 1)`: `4 cbrt(2) / (3 + 4 cbrt(2))`.
pub fn q0() -> f64 {
    let k = 4.0 * 2f64.cbrt();
    k / (3.0 + k)
}

/// Tangency point of the chord to `(1, 1)`: `1/2 + (3/310) sqrt(465)`.
pub fn q1() -> f64 {
    0.5 + 3.0 / 310.0 * 465f64.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct AnalyticBenchmarks {
    pub q0: f64,
    pub r0: f64,
    pub q1: f64,
    pub r1: f64,
}

/// Computes the region boundaries of the restricted dual problem.
///
/// `r1` comes from the chord condition and is cross-checked against the
/// tangency condition `r1 = -tau3'(q1, 0)`.
pub fn benchmarks() -> Result<AnalyticBenchmarks> {
    let q0 = q0();
    let q1 = q1();
    let r0 = -tau3_diagonal_slope(q0)?;
    let r1 = -(1.0 - tau3_diagonal(q1)) / (1.0 - q1);
    let tangent = -tau3_diagonal_slope(q1)?;
    if (r1 - tangent).abs() > 1e-8 {
        return Err(Error::Internal(format!(
            "chord slope {r1} and tangent slope {tangent} disagree at q1"
        )));
    }
    Ok(AnalyticBenchmarks { q0, r0, q1, r1 })
}

/// Convex hull of `tau3(q, 0)` on `[0, 1]`, piecewise in the three regions.
pub fn restricted_bound_analytic(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p = {p} outside [0, 1]")));
    }
    let b = benchmarks()?;
    Ok(if p <= b.q0 {
        0.0
    } else if p <= b.q1 {
        tau3_diagonal(p)
    } else {
        1.0 - b.r1.abs() * (1.0 - p)
    })
}

/// Overlap with GHZ of the pure states in the GHZ-W span that satisfy the
/// off-diagonal witness constraint, on the branch selected by
/// `omega cos(phi) < 0`.
///
/// The constraint is `q - p - 2 sqrt(q(1-q)) omega cos(phi) = 0`, the value
/// `<Z|W_skew|Z> = -p` with `W_skew` built by [`crate::qstate::skew_witness`].
/// Returns `None` when `omega cos(phi) >= 0`.
pub fn skew_qmin(p: f64, phi: f64, omega: f64) -> Result<Option<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p = {p} outside [0, 1]")));
    }
    let s = omega * phi.cos();
    if !(s < 0.0) {
        return Ok(None);
    }
    skew_branch(p, s, -1.0).map(Some)
}

fn skew_branch(p: f64, s: f64, sign: f64) -> Result<f64> {
    let s2 = s * s;
    let disc = s2 + p - p * p;
    if disc < -1e-15 {
        return Err(Error::Internal(format!("negative discriminant {disc} at p = {p}")));
    }
    let q = (p + 2.0 * s2 + sign * 2.0 * s.abs() * disc.max(0.0).sqrt()) / (1.0 + 4.0 * s2);
    Ok(q.clamp(0.0, 1.0))
}

/// The unique admissible root of the off-diagonal constraint for any sign of
/// `omega cos(phi)`: the minus branch when it is negative, the plus branch
/// when positive, and `q = p` when it vanishes.
pub fn skew_constraint_root(p: f64, phi: f64, omega: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p = {p} outside [0, 1]")));
    }
    let s = omega * phi.cos();
    if s == 0.0 {
        Ok(p)
    } else if s < 0.0 {
        skew_branch(p, s, -1.0)
    } else {
        skew_branch(p, s, 1.0)
    }
}

/// Residual `q - p - 2 sqrt(q(1-q)) omega cos(phi)` of the constraint.
pub fn skew_constraint_residual(q: f64, p: f64, phi: f64, omega: f64) -> f64 {
    q - p - 2.0 * (q * (1.0 - q)).max(0.0).sqrt() * omega * phi.cos()
}

/// Minimum over the phase of the measure on the constraint set of the
/// off-diagonal witness with real weight `omega` at GHZ weight `p`.
///
/// Returns the value and the minimizing phase. Evaluated by a dense phase
/// scan followed by golden-section refinement of the best cells.
pub fn skew_characteristic(p: f64, omega: f64, measure: Measure) -> Result<(f64, f64)> {
    let eval = |phi: f64| -> Result<f64> {
        let q = skew_constraint_root(p, phi, omega)?;
        Ok(measure.from_tau3(tau3_closed_form(GhzwPoint::new(q, phi)?)))
    };
    const CELLS: usize = 720;
    let h = TAU / CELLS as f64;
    let vals = (0..CELLS)
        .map(|i| eval(i as f64 * h))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..CELLS).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    let mut best = (vals[order[0]], order[0] as f64 * h);
    for &i in order.iter().take(6) {
        let (v, x) = golden_min(|x| eval(x).unwrap_or(f64::INFINITY), (i as f64 - 1.0) * h, (i as f64 + 1.0) * h, 1e-13);
        if v < best.0 {
            best = (v, x.rem_euclid(TAU));
        }
    }
    Ok(best)
}

pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(fx, x), (fc, c), (fd, d)]
        .into_iter()
        .min_by(|l, r| l.0.total_cmp(&r.0))
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::three_tangle;
    use std::f64::consts::PI;

    #[test]
    fn z_state_endpoints() {
        let ghz = NamedState::Ghz.state();
        let w = NamedState::W.state();
        for phi in [0.0, 1.0, 4.0] {
            let s = z_state(GhzwPoint::new(1.0, phi).unwrap());
            assert!((s.fidelity(&ghz) - 1.0).abs() < 1e-15);
        }
        let s = z_state(GhzwPoint::new(0.0, 0.0).unwrap());
        assert!((s.inner(&w) + 1.0).norm() < 1e-15);
    }

    #[test]
    fn closed_form_matches_tangle_at_half() {
        let pt = GhzwPoint::new(0.5, 0.0).unwrap();
        let direct = three_tangle(&z_state(pt)).tau3;
        assert!((direct - tau3_closed_form(pt)).abs() < 1e-12);
        let expected = (0.25 - tangle_coefficient() * 0.25).abs();
        assert!((tau3_closed_form(pt) - expected).abs() < 1e-15);
    }

    #[test]
    fn q0_is_a_zero() {
        assert!(tau3_closed_form(GhzwPoint::new(q0(), 0.0).unwrap()) < 1e-12);
        assert!(three_tangle(&z_state(GhzwPoint::new(q0(), 0.0).unwrap())).tau3 < 1e-10);
        assert_eq!(tau3_closed_form(GhzwPoint::new(1.0, 2.0).unwrap()), 1.0);
    }

    #[test]
    fn slope_matches_finite_differences() {
        let h = 1e-6;
        for q in [0.1, 0.3, q0() + 1e-3, 0.68, q1(), 0.9, 0.99] {
            let fd = (tau3_diagonal(q + h) - tau3_diagonal(q - h)) / (2.0 * h);
            assert!((fd - tau3_diagonal_slope(q).unwrap()).abs() < 1e-6, "q = {q}");
        }
        assert!(tau3_diagonal_slope(0.0).is_err());
    }

    #[test]
    fn benchmark_values() {
        let b = benchmarks().unwrap();
        assert!((b.q0 - 0.626851).abs() < 1e-6);
        assert!((b.r0 + 2.52).abs() < 0.01);
        assert!((b.q1 - 0.70868).abs() < 1e-5);
        // r0 = -2^(4/3): the tangent through the origin-side zero
        assert!((b.r0 + 2f64.powf(4.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn restricted_bound_regions() {
        let b = benchmarks().unwrap();
        assert_eq!(restricted_bound_analytic(0.5).unwrap(), 0.0);
        assert_eq!(restricted_bound_analytic(1.0).unwrap(), 1.0);
        assert_eq!(restricted_bound_analytic(0.68).unwrap(), tau3_diagonal(0.68));
        assert!((restricted_bound_analytic(0.85).unwrap() - (1.0 - b.r1.abs() * 0.15)).abs() < 1e-15);
        assert!(restricted_bound_analytic(1.2).is_err());
    }

    #[test]
    fn skew_qmin_cases() {
        assert!((skew_qmin(1.0, PI, 1.0).unwrap().unwrap() - 0.2).abs() < 1e-15);
        assert!((skew_qmin(0.4, PI, 1e-9).unwrap().unwrap() - 0.4).abs() < 1e-8);
        assert_eq!(skew_qmin(0.4, 0.0, 1.0).unwrap(), None);
        let q = skew_qmin(1.0, PI, 1.0).unwrap().unwrap();
        assert!(skew_constraint_residual(q, 1.0, PI, 1.0).abs() < 1e-12);
    }

    #[test]
    fn constraint_root_both_signs() {
        for &(p, phi, omega) in &[(0.3, 0.2, 1.0), (0.7, 2.9, 1.0), (0.9, 1.0, -0.5), (0.0, 0.4, 2.0)] {
            let q = skew_constraint_root(p, phi, omega).unwrap();
            assert!(skew_constraint_residual(q, p, phi, omega).abs() < 1e-12);
        }
    }
}
