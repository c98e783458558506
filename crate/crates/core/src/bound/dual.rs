use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::simplex::{self, SimplexOptions};
use super::smooth::Tilted;
use super::space::{project_to_sphere, Chart};
use super::{BoundProblem, BoundResult, OptimizerSettings, Status, TraceEntry};
use crate::error::{Error, Result};
use crate::qstate::{quadratic_form, Matrix8, Measure, NamedState, PureState, DIM};

const NEGATIVE_SCAN_POINTS: usize = 41;
const POSITIVE_SCAN_POINTS: usize = 21;
/// Simplex outcomes per inner minimization that get a gradient refinement.
const REFINED_STARTS: usize = 8;

/// Result of the inner minimization at a fixed multiplier vector.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerResult {
    /// `min_psi sum_k r_k (w_k - <psi|W_k|psi>) + E(psi)` over the search space.
    pub value: f64,
    pub argmin: PureState,
    /// At least one restart met the simplex convergence test.
    pub converged: bool,
}

// The w-independent part `min_psi E(psi) - sum_k r_k <psi|W_k|psi>`.
#[derive(Debug)]
struct InnerCore {
    offset: f64,
    argmin: [Complex64; DIM],
    converged: bool,
}

/// Dual solver for one set of witnesses, search space and measure.
///
/// The inner infimum does not depend on the measured values, so a solver can
/// be reused across a sweep of measured values; inner minimizations at
/// repeated multipliers are memoized.
pub struct LegendreSolver {
    measure: Measure,
    chart: Chart,
    witnesses: Vec<Matrix8>,
    settings: OptimizerSettings,
    starts: Vec<Vec<f64>>,
    cache: Mutex<HashMap<Vec<u64>, Arc<InnerCore>>>,
}

/// Deterministic starting points: the named warm starts that have a
/// component in the search space, then uniformly random points on the sphere,
/// one independent ChaCha stream per restart index.
pub(crate) fn starting_points(chart: &Chart, settings: &OptimizerSettings) -> Vec<Vec<f64>> {
    let warm = [
        NamedState::Ghz,
        NamedState::W,
        NamedState::WBar,
        NamedState::Basis(0),
        NamedState::Basis(7),
    ];
    let mut starts: Vec<Vec<f64>> = warm
        .iter()
        .filter_map(|s| chart.coordinates_of(&s.state()))
        .collect();
    for i in 0..settings.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        rng.set_stream(i as u64);
        let mut x: Vec<f64> = (0..chart.real_dim()).map(|_| rng.sample(StandardNormal)).collect();
        project_to_sphere(&mut x);
        starts.push(x);
    }
    starts
}

pub(crate) fn inner_options(settings: &OptimizerSettings) -> SimplexOptions {
    SimplexOptions {
        initial_step: 0.25,
        f_tolerance: settings.inner_tolerance,
        // the global phase is a flat direction along which the simplex need
        // not shrink, so only the spread of values is tested
        x_tolerance: f64::INFINITY,
        max_iterations: settings.max_inner_iterations,
        polish_rounds: 2,
    }
}

/// Gradient-refines the simplex outcomes with the lowest values; the rest
/// are kept as they are.
pub(crate) fn refine_best(tilted: &Tilted, coarse: Vec<simplex::SimplexOutcome>) -> Vec<(Vec<f64>, f64, bool)> {
    let mut order: Vec<usize> = (0..coarse.len()).collect();
    order.sort_by(|&a, &b| coarse[a].value.total_cmp(&coarse[b].value).then(a.cmp(&b)));
    let chosen = &order[..REFINED_STARTS.min(order.len())];
    let refined: Vec<(usize, (Vec<f64>, f64, bool))> = chosen
        .par_iter()
        .map(|&i| (i, tilted.refine(&coarse[i].x)))
        .collect();
    let mut out: Vec<(Vec<f64>, f64, bool)> = coarse.into_iter().map(|o| (o.x, o.value, o.converged)).collect();
    for (i, (x, value, ok)) in refined {
        let was = out[i].2;
        out[i] = (x, value, ok || was);
    }
    out
}

/// Lowest value, ties going to the lowest start index.
pub(crate) fn lowest<T>(outcomes: Vec<(Vec<f64>, f64, T)>) -> (Vec<f64>, f64, T) {
    outcomes
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.1.total_cmp(&b.1).then(i.cmp(j)))
        .map(|(_, o)| o)
        .expect("at least one start")
}

impl LegendreSolver {
    pub fn new(problem: &BoundProblem) -> Result<Self> {
        let chart = Chart::new(problem.space())?;
        let settings = problem.settings().clone();
        settings.validate()?;
        let starts = starting_points(&chart, &settings);
        Ok(Self {
            measure: problem.measure(),
            chart,
            witnesses: problem.witnesses().iter().map(|w| *w.matrix()).collect(),
            settings,
            starts,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn num_witnesses(&self) -> usize {
        self.witnesses.len()
    }

    fn check_r(&self, r: &[f64]) -> Result<()> {
        if r.len() != self.witnesses.len() {
            return Err(Error::invalid(format!(
                "expected {} multipliers, got {}",
                self.witnesses.len(),
                r.len()
            )));
        }
        let [lo, hi] = self.settings.r_box;
        if r.iter().any(|v| !(*v >= lo && *v <= hi)) {
            return Err(Error::invalid(format!("multipliers {r:?} outside [{lo}, {hi}]")));
        }
        Ok(())
    }

    fn core(&self, r: &[f64]) -> Arc<InnerCore> {
        let key: Vec<u64> = r.iter().map(|v| v.to_bits()).collect();
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Arc::clone(hit);
        }
        let mut tilt = Matrix8::zeros();
        for (w, rk) in self.witnesses.iter().zip(r) {
            tilt += w * Complex64::new(*rk, 0.0);
        }
        let measure = self.measure;
        let chart = &self.chart;
        let objective = |x: &[f64]| {
            let amps = chart.amplitudes(x);
            measure.of_amplitudes(&amps) - quadratic_form(&tilt, &amps).re
        };
        let tilted = Tilted::new(chart, chart.restrict(&tilt), measure);
        let opts = inner_options(&self.settings);
        let coarse: Vec<simplex::SimplexOutcome> = self
            .starts
            .par_iter()
            .map(|x0| simplex::minimize(objective, project_to_sphere, x0, &opts))
            .collect();
        let outcomes = refine_best(&tilted, coarse);
        let converged = outcomes.iter().any(|o| o.2);
        let (x, value, _) = lowest(outcomes);
        let core = Arc::new(InnerCore {
            offset: value,
            argmin: chart.amplitudes(&x),
            converged,
        });
        self.cache.lock().unwrap().insert(key, Arc::clone(&core));
        core
    }

    /// Inner infimum at multipliers `r` for the given measured values.
    pub fn inner(&self, r: &[f64], measured: &[f64]) -> Result<InnerResult> {
        self.check_r(r)?;
        if measured.len() != r.len() {
            return Err(Error::invalid("measured values do not match the witnesses"));
        }
        let core = self.core(r);
        Ok(InnerResult {
            value: dual_value(&core, r, measured),
            argmin: PureState::from_normalized_unchecked(core.argmin),
            converged: core.converged,
        })
    }

    /// `sup_r` of the inner infimum over the multiplier box.
    pub fn solve(&self, measured: &[f64]) -> Result<BoundResult> {
        if measured.len() != self.witnesses.len() || measured.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("measured values do not match the witnesses"));
        }
        match self.witnesses.len() {
            1 => Ok(self.solve_single(measured[0])),
            2 => Ok(self.solve_pair(measured)),
            k => Err(Error::invalid(format!(
                "the dual solver supports one or two witnesses, got {k}"
            ))),
        }
    }

    fn scan_grid(&self) -> Vec<f64> {
        let [lo, hi] = self.settings.r_box;
        let mut grid = Vec::new();
        if lo < 0.0 {
            let top = hi.min(0.0);
            let n = NEGATIVE_SCAN_POINTS - 1;
            grid.extend((0..=n).map(|i| lo + (top - lo) * i as f64 / n as f64));
        }
        if hi > 0.0 {
            let bottom = lo.max(0.0);
            let n = POSITIVE_SCAN_POINTS - 1;
            grid.extend((0..=n).map(|i| bottom + (hi - bottom) * i as f64 / n as f64));
        }
        if grid.is_empty() {
            grid.push(lo);
        }
        grid.dedup();
        grid
    }

    fn solve_single(&self, w: f64) -> BoundResult {
        let measured = [w];
        let mut trace: Vec<(TraceEntry, Arc<InnerCore>)> = Vec::new();
        let mut eval = |r: f64| -> f64 {
            let core = self.core(&[r]);
            let value = dual_value(&core, &[r], &measured);
            trace.push((TraceEntry { r: vec![r], value }, core));
            value
        };

        let grid = self.scan_grid();
        let values: Vec<f64> = grid.iter().map(|&r| eval(r)).collect();
        let best = argmax(&values);
        let mut a = grid[best.saturating_sub(1)];
        let mut b = grid[(best + 1).min(grid.len() - 1)];

        // golden-section ascent; the dual function is concave in r
        let g = (5f64.sqrt() - 1.0) / 2.0;
        if b - a > self.settings.outer_tolerance {
            let mut c = b - g * (b - a);
            let mut d = a + g * (b - a);
            let mut fc = eval(c);
            let mut fd = eval(d);
            while b - a > self.settings.outer_tolerance {
                if fc >= fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = eval(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = eval(d);
                }
            }
        }
        finish(trace)
    }

    fn solve_pair(&self, measured: &[f64]) -> BoundResult {
        let [lo, hi] = self.settings.r_box;
        let trace: RefCell<Vec<(TraceEntry, Arc<InnerCore>)>> = RefCell::new(Vec::new());
        let neg = |r: &[f64]| -> f64 {
            let core = self.core(r);
            let value = dual_value(&core, r, measured);
            trace.borrow_mut().push((TraceEntry { r: r.to_vec(), value }, core));
            -value
        };
        let clamp = |r: &mut [f64]| r.iter_mut().for_each(|v| *v = v.clamp(lo, hi));
        let span = hi - lo;
        let opts = SimplexOptions {
            initial_step: (span / 8.0).max(1e-3),
            f_tolerance: self.settings.outer_tolerance,
            x_tolerance: self.settings.outer_tolerance,
            max_iterations: 400,
            polish_rounds: 1,
        };
        // the dual function is concave, so one ascent (with its polishing restart) suffices
        let mut x0 = vec![0.0, 0.0];
        clamp(&mut x0);
        simplex::minimize(neg, clamp, &x0, &opts);
        finish(trace.into_inner())
    }
}

fn dual_value(core: &InnerCore, r: &[f64], measured: &[f64]) -> f64 {
    r.iter().zip(measured).map(|(rk, wk)| rk * wk).sum::<f64>() + core.offset
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn finish(trace: Vec<(TraceEntry, Arc<InnerCore>)>) -> BoundResult {
    let best = argmax(&trace.iter().map(|(t, _)| t.value).collect::<Vec<_>>());
    let (entry, core) = &trace[best];
    let all_converged = trace.iter().all(|(_, c)| c.converged);
    let status = if entry.value <= 0.0 {
        Status::TrivialZero
    } else if !all_converged {
        Status::MaxIter
    } else {
        Status::Converged
    };
    BoundResult {
        epsilon: entry.value.max(0.0),
        dual_value: entry.value,
        r_star: entry.r.clone(),
        inner_minimizer: PureState::from_normalized_unchecked(core.argmin),
        trace: trace.iter().map(|(t, _)| t.clone()).collect(),
        status,
    }
}

/// Inner infimum of the dual function at multipliers `r`.
pub fn inner_infimum(problem: &BoundProblem, r: &[f64]) -> Result<InnerResult> {
    LegendreSolver::new(problem)?.inner(r, problem.measured())
}

/// The dual lower bound `eps(w) = sup_r inf_psi (...)`, clamped at zero.
pub fn legendre_bound(problem: &BoundProblem) -> Result<BoundResult> {
    LegendreSolver::new(problem)?.solve(problem.measured())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound::SearchSpace;
    use crate::charcurve::{benchmarks, restricted_bound_analytic, tau3_diagonal};
    use crate::qstate::{projector_witness, Observable};

    fn span_problem(p: f64) -> BoundProblem {
        BoundProblem::projector(&NamedState::Ghz.state(), 0.5, p, Measure::Tau3, SearchSpace::ghz_w_span()).unwrap()
    }

    #[test]
    fn product_states_make_the_untilted_infimum_zero() {
        let w = Observable::projector(&NamedState::Ghz.state()).scaled(-1.0);
        let problem = BoundProblem::new(vec![w], vec![-0.9], Measure::Tau3, SearchSpace::Full, Default::default()).unwrap();
        let inner = inner_infimum(&problem, &[0.0]).unwrap();
        assert!(inner.value.abs() < 1e-9, "{}", inner.value);
    }

    #[test]
    fn positive_multipliers_give_nothing() {
        let problem = BoundProblem::fidelity(0.9, Measure::Tau3, SearchSpace::Symmetric).unwrap();
        for r in [0.5, 2.0, 10.0] {
            let inner = inner_infimum(&problem, &[r]).unwrap();
            assert!(inner.value <= 1e-9, "r = {r}: {}", inner.value);
        }
    }

    #[test]
    fn two_minima_at_the_tangent_multiplier() {
        let b = benchmarks().unwrap();
        let ghz = NamedState::Ghz.state();
        let problem = BoundProblem::new(
            vec![Observable::projector(&ghz).scaled(-1.0)],
            vec![0.0],
            Measure::Tau3,
            SearchSpace::ghz_w_span(),
            Default::default(),
        )
        .unwrap();
        // inf_q tau3(q, 0) + r1 q is attained at q1 and at q = 1
        let at_q1 = tau3_diagonal(b.q1) + b.r1 * b.q1;
        let at_one = 1.0 + b.r1;
        assert!((at_q1 - at_one).abs() < 1e-9);
        let inner = inner_infimum(&problem, &[b.r1]).unwrap();
        assert!((inner.value - at_one).abs() < 1e-6, "{} vs {at_one}", inner.value);
        let q = inner.argmin.fidelity(&ghz);
        assert!((q - b.q1).abs() < 1e-3 || (q - 1.0).abs() < 1e-3, "{q}");
    }

    #[test]
    fn restricted_examples() {
        let b = benchmarks().unwrap();
        let zero = legendre_bound(&span_problem(0.5)).unwrap();
        assert_eq!(zero.epsilon, 0.0);
        assert_eq!(zero.status, Status::TrivialZero);

        let tangent = legendre_bound(&span_problem(0.85)).unwrap();
        assert!((tangent.epsilon - (1.0 - b.r1.abs() * 0.15)).abs() < 1e-3);
        assert!((tangent.r_star[0] - b.r1).abs() < 1e-3, "{:?}", tangent.r_star);
        assert_eq!(tangent.status, Status::Converged);
    }

    #[test]
    fn restricted_curve_matches_analytic() {
        let solver = LegendreSolver::new(&span_problem(0.5)).unwrap();
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            let eps = solver.solve(&[0.5 - p]).unwrap().epsilon;
            let exact = restricted_bound_analytic(p).unwrap();
            assert!((eps - exact).abs() < 1e-3, "p = {p}: {eps} vs {exact}");
        }
    }

    #[test]
    fn trace_is_dominated_by_epsilon() {
        let res = legendre_bound(&span_problem(0.8)).unwrap();
        let tol = OptimizerSettings::default().outer_tolerance;
        assert!(res.trace.iter().all(|t| t.value <= res.epsilon + tol));
        assert_eq!(res.epsilon, res.dual_value.max(0.0));
    }

    #[test]
    fn identity_shift_leaves_epsilon_unchanged() {
        let ghz = NamedState::Ghz.state();
        let p = 0.9;
        let base = legendre_bound(&span_problem(p)).unwrap().epsilon;
        for c in [-1.0, 0.37, 2.0] {
            let w = projector_witness(&ghz, 0.5).unwrap().shifted(c);
            let problem =
                BoundProblem::new(vec![w], vec![0.5 - p + c], Measure::Tau3, SearchSpace::ghz_w_span(), Default::default())
                    .unwrap();
            let eps = legendre_bound(&problem).unwrap().epsilon;
            assert!((eps - base).abs() < 1e-6, "c = {c}: {eps} vs {base}");
        }
    }

    #[test]
    fn deterministic_traces() {
        let problem = BoundProblem::fidelity(0.9, Measure::Tau3, SearchSpace::Symmetric)
            .unwrap()
            .with_settings(OptimizerSettings {
                restarts: 8,
                ..Default::default()
            })
            .unwrap();
        let a = legendre_bound(&problem).unwrap();
        let b = legendre_bound(&problem).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multipliers_checked_against_box() {
        let solver = LegendreSolver::new(&span_problem(0.8)).unwrap();
        assert!(solver.inner(&[-25.0], &[0.1]).is_err());
        assert!(solver.inner(&[-1.0, 2.0], &[0.1]).is_err());
        assert!(solver.solve(&[f64::NAN]).is_err());
    }
}
