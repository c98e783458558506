//! Gradient refinement of simplex minimizers of the tilted objective
//! `E(psi) - <psi|M|psi>`.
//!
//! `tau3 = 4 |H(psi)|` has a kink on the zero set of the hyperdeterminant
//! `H`, where simplex descent stalls. The refinement minimizes the smooth
//! surrogate `4 sqrt(|H|^2 + delta^2)`, which exceeds `tau3` by at most
//! `4 delta`, with `delta` driven towards zero, using L-BFGS on the
//! scale-invariant extension of the objective to `R^{2n} \ {0}`.

use argmin::core::{CostFunction, Error as ArgminError, Executor, Gradient, State, TerminationReason};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::space::{project_to_sphere, Chart};
use crate::qstate::{hyperdeterminant_gradient, Measure, DIM};

const SMOOTHING: [f64; 3] = [1e-3, 1e-5, 1e-7];
const STAGE_ITERATIONS: u64 = 300;
const GRADIENT_TOLERANCE: f64 = 1e-9;
const OVERFLOW_COST: f64 = 1e100;

pub(crate) struct Tilted<'a> {
    chart: &'a Chart,
    /// Tilt restricted to the chart.
    tilt: DMatrix<Complex64>,
    measure: Measure,
}

struct Smoothed<'a, 'b> {
    inner: &'b Tilted<'a>,
    delta: f64,
}

impl<'a> Tilted<'a> {
    pub fn new(chart: &'a Chart, tilt: DMatrix<Complex64>, measure: Measure) -> Self {
        Self { chart, tilt, measure }
    }

    /// Smoothed objective and, when requested, its gradient in chart coordinates.
    /// The objective is scale invariant, so it is evaluated at `x / |x|` and
    /// the gradient divided by `|x|`; this keeps long line-search steps finite.
    fn evaluate(&self, x: &[f64], delta: f64, grad: Option<&mut [f64]>) -> f64 {
        let n = self.chart.dim();
        let length = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(length > 1e-150 && length.is_finite()) {
            return f64::NAN;
        }
        let x: Vec<f64> = x.iter().map(|v| v / length).collect();
        let z = DVector::from_iterator(n, (0..n).map(|j| Complex64::new(x[j], x[n + j])));
        let amps = self.chart.embed(z.as_slice());
        let (h, dh_da) = hyperdeterminant_gradient(&amps);
        let v = &self.tilt * &z;
        let form = z.dotc(&v).re;
        let u = h.norm_sqr();

        let (value, scale) = match self.measure {
            Measure::Tau3 => {
                let root = (u + delta * delta).sqrt();
                (4.0 * root, 2.0 / root)
            }
            Measure::Tau3Sq => (16.0 * u, 16.0),
        };
        if let Some(g) = grad {
            // dH/dz_j through the chart basis
            let dh_dz: Vec<Complex64> = if self.chart.is_identity() {
                dh_da.to_vec()
            } else {
                self.chart
                    .basis()
                    .iter()
                    .map(|b| (0..DIM).map(|m| dh_da[m] * b[m]).sum())
                    .collect()
            };
            let radial = 8.0 * u;
            for j in 0..n {
                let w = h.conj() * dh_dz[j];
                let du_x = 2.0 * w.re - radial * x[j];
                let du_y = -2.0 * w.im - radial * x[n + j];
                let dq_x = 2.0 * v[j].re - 2.0 * form * x[j];
                let dq_y = 2.0 * v[j].im - 2.0 * form * x[n + j];
                g[j] = (scale * du_x - dq_x) / length;
                g[n + j] = (scale * du_y - dq_y) / length;
            }
        }
        value - form
    }

    /// Exact objective at normalized chart coordinates.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.evaluate(x, 0.0, None)
    }

    /// Returns the refined point and its exact value if it improves on `x0`,
    /// together with whether the last stage met the gradient tolerance.
    pub fn refine(&self, x0: &[f64]) -> (Vec<f64>, f64, bool) {
        let mut x = x0.to_vec();
        project_to_sphere(&mut x);
        let mut best = (x.clone(), self.value(&x));
        let stages: &[f64] = match self.measure {
            Measure::Tau3 => &SMOOTHING,
            Measure::Tau3Sq => &[0.0],
        };
        let mut converged = false;
        for &delta in stages {
            let Some((next, ok)) = self.lbfgs(&x, delta) else {
                converged = false;
                continue;
            };
            x = next;
            project_to_sphere(&mut x);
            converged = ok;
            let value = self.value(&x);
            if value < best.1 {
                best = (x.clone(), value);
            }
        }
        (best.0, best.1, converged)
    }

    fn lbfgs(&self, x0: &[f64], delta: f64) -> Option<(Vec<f64>, bool)> {
        let problem = Smoothed { inner: self, delta };
        let solver = LBFGS::new(MoreThuenteLineSearch::new(), 7)
            .with_tolerance_grad(GRADIENT_TOLERANCE)
            .ok()?
            .with_tolerance_cost(0.0)
            .ok()?;
        let result = Executor::new(problem, solver)
            .configure(|s| s.param(x0.to_vec()).max_iters(STAGE_ITERATIONS))
            .timer(false)
            .run()
            .ok()?;
        let mut state = result.state;
        // line-search breakdowns happen at the precision floor and count as converged
        let converged = !matches!(
            state.get_termination_reason(),
            Some(TerminationReason::MaxItersReached) | None
        );
        let x = state.take_best_param()?;
        x.iter().all(|v| v.is_finite()).then_some((x, converged))
    }
}

fn finite(value: f64) -> Result<f64, ArgminError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ArgminError::msg("non-finite objective"))
    }
}

// The objective is flat along the radius; `(|x|^2 - 1)^2` pins the scale
// without moving stationary points, which all have vanishing radial gradient.
fn radial(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() - 1.0
}

impl CostFunction for Smoothed<'_, '_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> Result<f64, ArgminError> {
        // a huge but finite value makes the line search backtrack
        let value = self.inner.evaluate(x, self.delta, None) + radial(x).powi(2);
        Ok(if value.is_finite() { value } else { OVERFLOW_COST })
    }
}

impl Gradient for Smoothed<'_, '_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, x: &Self::Param) -> Result<Vec<f64>, ArgminError> {
        let mut g = vec![0.0; x.len()];
        finite(self.inner.evaluate(x, self.delta, Some(&mut g)))?;
        let stretch = 4.0 * radial(x);
        g.iter_mut().zip(x).for_each(|(gi, xi)| *gi += stretch * xi);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(ArgminError::msg("non-finite gradient"));
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound::SearchSpace;
    use crate::qstate::{projector_witness, NamedState};

    fn tilt(chart: &Chart, r: f64) -> DMatrix<Complex64> {
        let w = projector_witness(&NamedState::Ghz.state(), 0.75).unwrap();
        chart.restrict(&(w.matrix() * Complex64::new(r, 0.0)))
    }

    #[test]
    fn gradient_matches_differences() {
        for space in [SearchSpace::Full, SearchSpace::Symmetric] {
            let chart = Chart::new(&space).unwrap();
            for measure in [Measure::Tau3, Measure::Tau3Sq] {
                let obj = Tilted::new(&chart, tilt(&chart, -1.7), measure);
                let x: Vec<f64> = (0..chart.real_dim()).map(|i| (i as f64 * 0.91 + 0.3).sin()).collect();
                let mut g = vec![0.0; x.len()];
                obj.evaluate(&x, 1e-3, Some(&mut g));
                let step = 1e-6;
                for i in 0..x.len() {
                    let mut up = x.clone();
                    let mut down = x.clone();
                    up[i] += step;
                    down[i] -= step;
                    let fd = (obj.evaluate(&up, 1e-3, None) - obj.evaluate(&down, 1e-3, None)) / (2.0 * step);
                    assert!((fd - g[i]).abs() < 1e-6 * (1.0 + fd.abs()), "{measure:?} {i}: {fd} vs {}", g[i]);
                }
            }
        }
    }

    #[test]
    fn refinement_reaches_the_zero_set() {
        // tilt -0.08 (3/4 - F): the minimum is 0, attained by tau3 = 0 states with F = 3/4
        let chart = Chart::new(&SearchSpace::Full).unwrap();
        let obj = Tilted::new(&chart, tilt(&chart, -0.08), Measure::Tau3);
        let x0: Vec<f64> = (0..16).map(|i| (i as f64 * 2.1).cos()).collect();
        let (_, value, _) = obj.refine(&x0);
        assert!(value.abs() < 1e-5, "{value}");
    }
}
