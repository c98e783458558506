//! Lower convex envelope of one-dimensional sampled functions.

use serde::Serialize;

use crate::error::{Error, Result};

/// Gap below the curve above which a sample counts as lying in an affine region.
pub const AFFINE_TOLERANCE: f64 = 1e-9;

/// Samples `(x_i, y_i)` with strictly increasing abscissae.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledCurve {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl SampledCurve {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::invalid(format!(
                "curve has {} abscissae but {} values",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::invalid("a curve needs at least two samples"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::invalid("curve samples must be finite"));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("abscissae must be strictly increasing"));
        }
        Ok(Self { xs, ys })
    }

    /// Samples `f` at the given abscissae.
    pub fn from_fn(xs: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, ys)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }
}

/// The greatest convex function below the piecewise-linear interpolant of a
/// [`SampledCurve`], stored as a subsequence of its samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexEnvelope {
    curve: SampledCurve,
    knots: Vec<usize>,
    affine_regions: Vec<(f64, f64)>,
}

impl ConvexEnvelope {
    pub fn curve(&self) -> &SampledCurve {
        &self.curve
    }

    /// Indices into the curve of the hull vertices, in increasing order.
    pub fn knot_indices(&self) -> &[usize] {
        &self.knots
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.knots.iter().map(|&i| (self.curve.xs[i], self.curve.ys[i]))
    }

    /// Maximal x-intervals on which the envelope is a chord strictly below the curve.
    pub fn affine_regions(&self) -> &[(f64, f64)] {
        &self.affine_regions
    }

    /// Envelope values at every sample of the underlying curve.
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.curve.len());
        for seg in self.knots.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            for i in a..b {
                out.push(self.interpolate(a, b, self.curve.xs[i]));
            }
        }
        let last = *self.knots.last().unwrap();
        out.push(self.curve.ys[last]);
        out
    }

    /// The envelope as a curve on the original abscissae.
    pub fn as_curve(&self) -> SampledCurve {
        SampledCurve {
            xs: self.curve.xs.clone(),
            ys: self.values(),
        }
    }

    fn interpolate(&self, a: usize, b: usize, x: f64) -> f64 {
        let (xa, ya) = (self.curve.xs[a], self.curve.ys[a]);
        let (xb, yb) = (self.curve.xs[b], self.curve.ys[b]);
        if x == xa {
            return ya;
        }
        if x == xb {
            return yb;
        }
        let t = (x - xa) / (xb - xa);
        ya + t * (yb - ya)
    }
}

// Middle point is dropped only when it lies strictly above the chord, so
// collinear samples stay knots.
fn strictly_above_chord(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> bool {
    (b.1 - a.1) * (c.0 - b.0) > (c.1 - b.1) * (b.0 - a.0)
}

/// Lower hull of the samples by a left-to-right monotone-chain scan.
pub fn lower_convex_envelope(curve: &SampledCurve) -> ConvexEnvelope {
    let pt = |i: usize| (curve.xs[i], curve.ys[i]);
    let mut knots: Vec<usize> = Vec::with_capacity(curve.len());
    for i in 0..curve.len() {
        while knots.len() >= 2
            && strictly_above_chord(pt(knots[knots.len() - 2]), pt(knots[knots.len() - 1]), pt(i))
        {
            knots.pop();
        }
        knots.push(i);
    }
    let mut env = ConvexEnvelope {
        curve: curve.clone(),
        knots,
        affine_regions: Vec::new(),
    };
    let values = env.values();
    let mut regions = Vec::new();
    for seg in env.knots.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if (a + 1..b).any(|i| values[i] < curve.ys[i] - AFFINE_TOLERANCE) {
            regions.push((curve.xs[a], curve.xs[b]));
        }
    }
    env.affine_regions = regions;
    env
}

/// Linear interpolation between hull knots; no extrapolation.
pub fn envelope_eval(env: &ConvexEnvelope, x: f64) -> Result<f64> {
    let (lo, hi) = env.curve.domain();
    if !(x >= lo && x <= hi) {
        return Err(Error::invalid(format!("x = {x} outside the sampled domain [{lo}, {hi}]")));
    }
    let xs = &env.curve.xs;
    let pos = env.knots.partition_point(|&k| xs[k] < x);
    if pos < env.knots.len() && xs[env.knots[pos]] == x {
        return Ok(env.curve.ys[env.knots[pos]]);
    }
    let (a, b) = (env.knots[pos - 1], env.knots[pos]);
    Ok(env.interpolate(a, b, x))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityReport {
    /// `(x_i, second central difference)` at every interior sample.
    pub second_differences: Vec<(f64, f64)>,
    /// Maximal runs of interior samples whose second difference is below `-tolerance`.
    pub nonconvex: Vec<(f64, f64)>,
}

impl ConvexityReport {
    pub fn is_convex(&self) -> bool {
        self.nonconvex.is_empty()
    }
}

/// Discrete second-derivative check on a possibly non-uniform grid.
pub fn convexity_diagnostic(curve: &SampledCurve, tolerance: f64) -> Result<ConvexityReport> {
    if curve.len() < 3 {
        return Err(Error::invalid("convexity check needs at least three samples"));
    }
    let (xs, ys) = (&curve.xs, &curve.ys);
    let second_differences: Vec<(f64, f64)> = (1..xs.len() - 1)
        .map(|i| {
            let left = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
            let right = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
            (xs[i], 2.0 * (right - left) / (xs[i + 1] - xs[i - 1]))
        })
        .collect();
    let mut nonconvex = Vec::new();
    let mut run: Option<(f64, f64)> = None;
    for &(x, d2) in &second_differences {
        if d2 < -tolerance {
            run = Some(match run {
                Some((start, _)) => (start, x),
                None => (x, x),
            });
        } else if let Some(r) = run.take() {
            nonconvex.push(r);
        }
    }
    nonconvex.extend(run);
    Ok(ConvexityReport {
        second_differences,
        nonconvex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn rejects_bad_curves() {
        assert!(SampledCurve::new(vec![0.0], vec![1.0]).is_err());
        assert!(SampledCurve::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(SampledCurve::new(vec![1.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(SampledCurve::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(SampledCurve::new(vec![0.0, f64::NAN], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn parabola_is_its_own_envelope() {
        let c = SampledCurve::from_fn(grid(51, -1.0, 1.0), |x| x * x).unwrap();
        let env = lower_convex_envelope(&c);
        assert_eq!(env.values(), c.ys());
        assert!(env.affine_regions().is_empty());
        assert!(convexity_diagnostic(&c, 1e-9).unwrap().is_convex());
    }

    #[test]
    fn concave_bump_becomes_chord() {
        let c = SampledCurve::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        let env = lower_convex_envelope(&c);
        assert_eq!(env.values(), vec![0.0, 0.0, 0.0]);
        assert_eq!(env.affine_regions(), &[(0.0, 1.0)]);
        assert_eq!(env.knot_indices(), &[0, 2]);
        let report = convexity_diagnostic(&c, 1e-9).unwrap();
        assert_eq!(report.nonconvex, vec![(0.5, 0.5)]);
    }

    #[test]
    fn collinear_points_are_kept() {
        let c = SampledCurve::from_fn(grid(5, 0.0, 1.0), |x| 2.0 * x + 1.0).unwrap();
        let env = lower_convex_envelope(&c);
        assert_eq!(env.knot_indices(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn eval_at_knots_midpoints_and_outside() {
        let c = SampledCurve::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 3.0, 0.0, 2.0]).unwrap();
        let env = lower_convex_envelope(&c);
        assert_eq!(env.knot_indices(), &[0, 2, 3]);
        assert_eq!(envelope_eval(&env, 2.0).unwrap(), 0.0);
        assert_eq!(envelope_eval(&env, 3.0).unwrap(), 2.0);
        assert_eq!(envelope_eval(&env, 2.5).unwrap(), 1.0);
        assert_eq!(envelope_eval(&env, 1.0).unwrap(), 0.5);
        assert!(envelope_eval(&env, 3.5).is_err());
        assert!(envelope_eval(&env, -0.1).is_err());
    }
}
