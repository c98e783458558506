use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::dual::{inner_options, starting_points, LegendreSolver};
use super::simplex::{self, SimplexOptions};
use super::space::{project_to_sphere, Chart};
use super::{BoundProblem, SearchSpace};
use crate::charcurve::golden_min;
use crate::envelope::{envelope_eval, lower_convex_envelope, SampledCurve};
use crate::error::{Error, Result};
use crate::qstate::{quadratic_form, Observable, PureState};

/// Constraint residual above which a penalty solution counts as infeasible.
pub const INFEASIBLE_RESIDUAL: f64 = 1e-4;
/// Constraint residual a penalty solution must reach to be kept.
pub const REQUIRED_RESIDUAL: f64 = 1e-6;

const EIGEN_DEGENERACY: f64 = 1e-10;

/// Minimum of the measure over pure states at one target.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PurePoint {
    pub target: Vec<f64>,
    pub value: f64,
    /// `max_k |<psi|W_k|psi> - w_k|` at the minimizer.
    pub residual: f64,
    pub feasible: bool,
    pub minimizer: Option<PureState>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstrainedCurve {
    /// Feasible points only, abscissa is the first target component.
    pub curve: SampledCurve,
    /// Every grid point in input order, including excluded ones.
    pub points: Vec<PurePoint>,
}

/// Maps sphere coordinates onto `{psi : <psi|A|psi> = 0}` for a Hermitian `A`
/// by moving along the great circle towards an extremal eigenvector of the
/// opposite sign. Projector-type constraints reduce to
/// `psi = sqrt(p) e^{i theta} |phi> + sqrt(1-p) |chi>`.
struct Retraction {
    a: DMatrix<Complex64>,
    low: Vec<DVector<Complex64>>,
    high: Vec<DVector<Complex64>>,
    low_value: f64,
    high_value: f64,
}

impl Retraction {
    fn new(a: DMatrix<Complex64>) -> Option<Self> {
        let eig = SymmetricEigen::new(a.clone());
        let vals = &eig.eigenvalues;
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo > EIGEN_DEGENERACY || hi < -EIGEN_DEGENERACY {
            return None;
        }
        let pick = |target: f64| -> Vec<DVector<Complex64>> {
            (0..vals.len())
                .filter(|&i| (vals[i] - target).abs() <= EIGEN_DEGENERACY.max(1e-9 * target.abs()))
                .map(|i| eig.eigenvectors.column(i).into_owned())
                .collect()
        };
        Some(Self {
            low: pick(lo),
            high: pick(hi),
            low_value: lo,
            high_value: hi,
            a,
        })
    }

    fn form(&self, x: &DVector<Complex64>, y: &DVector<Complex64>) -> Complex64 {
        x.dotc(&(&self.a * y))
    }

    fn apply(&self, v: DVector<Complex64>) -> DVector<Complex64> {
        let a0 = self.form(&v, &v).re;
        if a0.abs() <= 1e-15 {
            return v;
        }
        let (space, extreme) = if a0 > 0.0 {
            (&self.low, self.low_value)
        } else {
            (&self.high, self.high_value)
        };
        // component of v inside the extremal eigenspace, or its first vector
        let mut e = DVector::<Complex64>::zeros(v.len());
        for b in space {
            e += b * b.dotc(&v);
        }
        let en = e.norm();
        let e = if en > 1e-8 { e / Complex64::new(en, 0.0) } else { space[0].clone() };
        if extreme.abs() <= 1e-15 {
            return e;
        }
        let overlap = v.dotc(&e);
        let perp = &e - &v * overlap;
        let pn = perp.norm();
        if pn < 1e-14 {
            return e;
        }
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
        let u = perp / (phase * pn);
        let b0 = self.form(&u, &u).re;
        let c0 = self.form(&v, &u).re;
        let f = |t: f64| {
            let (s, c) = t.sin_cos();
            a0 * c * c + b0 * s * s + 2.0 * c0 * s * c
        };
        let t_end = pn.atan2(overlap.norm());
        let (mut lo, mut hi) = (0.0, t_end);
        let s_lo = f(lo).signum();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        let t = 0.5 * (lo + hi);
        let (s, c) = t.sin_cos();
        v * Complex64::new(c, 0.0) + u * Complex64::new(s, 0.0)
    }
}

fn coords_to_vector(chart: &Chart, x: &[f64]) -> DVector<Complex64> {
    let v = DVector::from_vec(chart.coefficients(x));
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

fn residual_of(witnesses: &[nalgebra::SMatrix<Complex64, 8, 8>], amps: &[Complex64; 8], target: &[f64]) -> f64 {
    witnesses
        .iter()
        .zip(target)
        .map(|(w, t)| (quadratic_form(w, amps).re - t).abs())
        .fold(0.0, f64::max)
}

/// `inf E(psi)` subject to `<psi|W_k|psi> = w_k`, at every grid point.
///
/// One witness: exact parametrization of the constraint set. Several
/// witnesses: quadratic penalty `mu sum_k (<W_k> - w_k)^2` with `mu` raised
/// tenfold from 10 to 1e7. Points whose final residual exceeds
/// [`REQUIRED_RESIDUAL`] are excluded from the returned curve; a residual
/// above [`INFEASIBLE_RESIDUAL`] marks the target infeasible.
pub fn constrained_pure_minimum(problem: &BoundProblem, grid: &[Vec<f64>]) -> Result<ConstrainedCurve> {
    let points = pure_points(problem, grid)?;
    let mut kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.feasible)
        .map(|p| (p.target[0], p.value))
        .collect();
    kept.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (xs, ys): (Vec<f64>, Vec<f64>) = kept.into_iter().unzip();
    if xs.len() < 2 {
        return Err(Error::Infeasible(format!(
            "only {} of {} grid targets are attainable by pure states in the search space",
            xs.len(),
            grid.len()
        )));
    }
    Ok(ConstrainedCurve {
        curve: SampledCurve::new(xs, ys)?,
        points,
    })
}

fn pure_points(problem: &BoundProblem, grid: &[Vec<f64>]) -> Result<Vec<PurePoint>> {
    let k = problem.num_witnesses();
    if let Some(bad) = grid.iter().find(|t| t.len() != k || t.iter().any(|v| !v.is_finite())) {
        return Err(Error::invalid(format!("grid target {bad:?} does not match {k} witnesses")));
    }
    let chart = Chart::new(problem.space())?;
    let settings = problem.settings();
    let starts = starting_points(&chart, settings);
    let measure = problem.measure();
    let witnesses: Vec<_> = problem.witnesses().iter().map(|w| *w.matrix()).collect();

    let points: Vec<PurePoint> = if k == 1 {
        let restricted = chart.restrict(&witnesses[0]);
        grid.par_iter()
            .map(|target| {
                let n = chart.dim();
                let shifted = &restricted - DMatrix::<Complex64>::identity(n, n) * Complex64::new(target[0], 0.0);
                let Some(retraction) = Retraction::new(shifted) else {
                    return PurePoint {
                        target: target.clone(),
                        value: f64::NAN,
                        residual: f64::INFINITY,
                        feasible: false,
                        minimizer: None,
                    };
                };
                let state_of = |x: &[f64]| {
                    let v = retraction.apply(coords_to_vector(&chart, x));
                    chart.embed(v.as_slice())
                };
                let objective = |x: &[f64]| measure.of_amplitudes(&state_of(x));
                let opts = inner_options(settings);
                let best = starts
                    .iter()
                    .map(|x0| simplex::minimize(objective, project_to_sphere, x0, &opts))
                    .enumerate()
                    .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
                    .map(|(_, o)| o)
                    .unwrap();
                let amps = state_of(&best.x);
                let state = PureState::normalized(amps).expect("retraction preserves the norm");
                let residual = residual_of(&witnesses, state.amplitudes(), target);
                PurePoint {
                    target: target.clone(),
                    value: best.value,
                    residual,
                    feasible: residual <= REQUIRED_RESIDUAL,
                    minimizer: Some(state),
                }
            })
            .collect()
    } else {
        grid.iter()
            .map(|target| penalty_point(&chart, &starts, problem, &witnesses, target))
            .collect()
    };
    Ok(points)
}

fn penalty_point(
    chart: &Chart,
    starts: &[Vec<f64>],
    problem: &BoundProblem,
    witnesses: &[nalgebra::SMatrix<Complex64, 8, 8>],
    target: &[f64],
) -> PurePoint {
    let measure = problem.measure();
    let opts = SimplexOptions {
        max_iterations: problem.settings().max_inner_iterations,
        ..inner_options(problem.settings())
    };
    let mut current: Vec<Vec<f64>> = starts.to_vec();
    let mut best = None;
    let mut mu = 10.0;
    while mu <= 1e7 * 1.000001 {
        let objective = |x: &[f64]| {
            let amps = chart.amplitudes(x);
            let penalty: f64 = witnesses
                .iter()
                .zip(target)
                .map(|(w, t)| (quadratic_form(w, &amps).re - t).powi(2))
                .sum();
            measure.of_amplitudes(&amps) + mu * penalty
        };
        let outcomes: Vec<_> = current
            .par_iter()
            .map(|x0| simplex::minimize(objective, project_to_sphere, x0, &opts))
            .collect();
        current = outcomes.iter().map(|o| o.x.clone()).collect();
        best = outcomes
            .into_iter()
            .enumerate()
            .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
            .map(|(_, o)| o);
        mu *= 10.0;
    }
    let best = best.expect("at least one stage");
    let state = chart.state(&best.x);
    let residual = residual_of(witnesses, state.amplitudes(), target);
    PurePoint {
        target: target.to_vec(),
        value: measure.of(&state),
        residual,
        feasible: residual <= REQUIRED_RESIDUAL,
        minimizer: (residual <= INFEASIBLE_RESIDUAL).then_some(state),
    }
}

/// Pure-state minimum followed by its lower convex envelope, sampled at the
/// feasible grid points.
///
/// The envelope at a grid point can depend on pure states whose witness value
/// lies outside the grid, so the samples are extended at the grid's mean
/// spacing out to the extreme eigenvalues of the witness in the search space.
/// The ends of every affine piece of the hull are then located by a short
/// search between the neighbouring samples.
pub fn bound_via_convexification(problem: &BoundProblem, grid: &[f64]) -> Result<SampledCurve> {
    if problem.num_witnesses() != 1 {
        return Err(Error::invalid("convexification path needs exactly one witness"));
    }
    if grid.len() < 2 || grid.iter().any(|w| !w.is_finite()) {
        return Err(Error::invalid("grid needs at least two finite points"));
    }
    let (lo, hi) = witness_range(&problem.witnesses()[0], problem.space())?;

    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let (first, last) = (sorted[0], sorted[sorted.len() - 1]);
    let spacing = (last - first) / (sorted.len() - 1) as f64;
    let mut samples = sorted.clone();
    if spacing > 0.0 {
        samples.extend(extension(first, lo, spacing));
        samples.extend(extension(last, hi, spacing));
    }
    samples.sort_by(f64::total_cmp);

    let targets: Vec<Vec<f64>> = samples.iter().map(|&w| vec![w]).collect();
    let pure = constrained_pure_minimum(problem, &targets)?;
    let mut envelope = lower_convex_envelope(&pure.curve);

    // a bridge endpoint is only located to within one spacing; search for the tangent point
    let extra = bridge_tangents(problem, &pure.curve, envelope.knot_indices());
    if !extra.is_empty() {
        let mut points: Vec<(f64, f64)> = pure.curve.points().chain(extra).collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        points.dedup_by(|a, b| a.0 == b.0);
        let (xs, ys) = points.into_iter().unzip();
        envelope = lower_convex_envelope(&SampledCurve::new(xs, ys)?);
    }
    let feasible: Vec<f64> = sorted
        .into_iter()
        .filter(|w| pure.points.iter().any(|p| p.target[0] == *w && p.feasible))
        .collect();
    let values = feasible
        .iter()
        .map(|&w| envelope_eval(&envelope, w))
        .collect::<Result<Vec<_>>>()?;
    SampledCurve::new(feasible, values)
}

// Golden-section steps shrink the search interval by 0.618^n.
const TANGENT_SEARCH_STEPS: i32 = 14;

// Around both ends of every hull segment that skips samples, minimizes
// `value(x) - slope * x` over the neighbouring cells and returns every
// feasible point evaluated on the way.
fn bridge_tangents(problem: &BoundProblem, curve: &SampledCurve, knots: &[usize]) -> Vec<(f64, f64)> {
    let (xs, ys) = (curve.xs(), curve.ys());
    let found = std::cell::RefCell::new(Vec::new());
    let value = |x: f64| match pure_points(problem, &[vec![x]]) {
        Ok(p) if p[0].feasible => {
            found.borrow_mut().push((x, p[0].value));
            p[0].value
        }
        _ => f64::INFINITY,
    };
    for k in knots.windows(2).filter(|k| k[1] > k[0] + 1) {
        let slope = (ys[k[1]] - ys[k[0]]) / (xs[k[1]] - xs[k[0]]);
        for end in [k[0], k[1]] {
            let (a, b) = (xs[end.saturating_sub(1)], xs[(end + 1).min(xs.len() - 1)]);
            let tol = (b - a) * 0.618f64.powi(TANGENT_SEARCH_STEPS);
            golden_min(|x| value(x) - slope * x, a, b, tol);
        }
    }
    found.into_inner()
}

/// Range of `<psi|W|psi>` over normalized states of the search space.
pub fn witness_range(witness: &Observable, space: &SearchSpace) -> Result<(f64, f64)> {
    let chart = Chart::new(space)?;
    let eig = SymmetricEigen::new(chart.restrict(witness.matrix())).eigenvalues;
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

// Points from `from` (exclusive) towards `to` (inclusive) at about `spacing`.
fn extension(from: f64, to: f64, spacing: f64) -> Vec<f64> {
    let gap = to - from;
    if gap.abs() <= 1e-12 {
        return Vec::new();
    }
    let steps = (gap.abs() / spacing).ceil().max(1.0) as usize;
    (1..=steps).map(|i| from + gap * i as f64 / steps as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub grid: Vec<f64>,
    pub legendre: Vec<f64>,
    pub convexified: Vec<f64>,
    pub max_discrepancy: f64,
    /// Witness value at which the discrepancy is largest.
    pub worst_at: f64,
}

/// Compares the dual bound with the convexified pure-state minimum on a grid
/// of measured values of the single witness.
pub fn equivalence_report(problem: &BoundProblem, grid: &[f64]) -> Result<EquivalenceReport> {
    let convex = bound_via_convexification(problem, grid)?;
    let solver = LegendreSolver::new(problem)?;
    let xs = convex.xs().to_vec();
    let legendre = xs
        .iter()
        .map(|&w| solver.solve(&[w]).map(|r| r.epsilon))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = (0.0, xs[0]);
    for ((x, l), c) in xs.iter().zip(&legendre).zip(convex.ys()) {
        let d = (l - c.max(0.0)).abs();
        if d > worst.0 {
            worst = (d, *x);
        }
    }
    Ok(EquivalenceReport {
        grid: xs,
        legendre,
        convexified: convex.ys().to_vec(),
        max_discrepancy: worst.0,
        worst_at: worst.1,
    })
}
