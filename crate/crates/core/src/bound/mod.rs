//! Lower bounds on the convex-roof measure from witness expectation values.
//!
//! Two routes are provided and checked against each other:
//!
//! * [`legendre_bound`]: `eps(w) = sup_r inf_psi ( sum_k r_k (w_k - <psi|W_k|psi>) + E(psi) )`,
//!   the dual of the mixed-state problem with the infimum taken over pure states;
//! * [`bound_via_convexification`]: minimize `E` over pure states that satisfy
//!   the witness constraints exactly, then take the lower convex envelope.
//!
//! [`certify_decomposition`] evaluates explicit decompositions, which give
//! upper bounds on the same quantity.

mod certify;
mod dual;
mod pure;
mod smooth;
pub(crate) mod simplex;
mod space;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{projector_witness, skew_witness, Measure, NamedState, Observable, PureState};

pub use certify::{
    certify_decomposition, ghz_w_mixture, mixture_density, noisy_ghz_fidelity, noisy_ghz_fidelity_ratio,
    noisy_ghz_state, Certificate, Decomposition, DECOMPOSITION_RESIDUAL_TOLERANCE,
};
pub use dual::{inner_infimum, legendre_bound, InnerResult, LegendreSolver};
pub use pure::{
    bound_via_convexification, constrained_pure_minimum, equivalence_report, ConstrainedCurve,
    EquivalenceReport, PurePoint,
    witness_range,
};
pub use space::SearchSpace;

/// Knobs of the multi-start inner search and the outer multiplier search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSettings {
    /// Random starting points per inner minimization, in addition to the
    /// fixed warm starts.
    pub restarts: usize,
    /// Box for every multiplier component.
    pub r_box: [f64; 2],
    pub inner_tolerance: f64,
    pub outer_tolerance: f64,
    pub seed: u64,
    pub max_inner_iterations: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            restarts: 64,
            r_box: [-20.0, 20.0],
            inner_tolerance: 1e-8,
            outer_tolerance: 1e-6,
            seed: 0,
            max_inner_iterations: 2000,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::invalid("restarts must be positive"));
        }
        let [lo, hi] = self.r_box;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::invalid(format!("multiplier box [{lo}, {hi}] is empty")));
        }
        if !(self.inner_tolerance > 0.0 && self.outer_tolerance > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if self.max_inner_iterations == 0 {
            return Err(Error::invalid("max_inner_iterations must be positive"));
        }
        Ok(())
    }
}

/// Witnesses, their measured expectation values and how to search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProblem")]
pub struct BoundProblem {
    witnesses: Vec<Observable>,
    measured: Vec<f64>,
    #[serde(default)]
    measure: Measure,
    #[serde(default)]
    space: SearchSpace,
    #[serde(default)]
    settings: OptimizerSettings,
}

#[derive(Deserialize)]
struct RawProblem {
    witnesses: Vec<Observable>,
    measured: Vec<f64>,
    #[serde(default)]
    measure: Measure,
    #[serde(default)]
    space: SearchSpace,
    #[serde(default)]
    settings: OptimizerSettings,
}

impl TryFrom<RawProblem> for BoundProblem {
    type Error = Error;

    fn try_from(raw: RawProblem) -> Result<Self> {
        BoundProblem::new(raw.witnesses, raw.measured, raw.measure, raw.space, raw.settings)
    }
}

impl BoundProblem {
    pub fn new(
        witnesses: Vec<Observable>,
        measured: Vec<f64>,
        measure: Measure,
        space: SearchSpace,
        settings: OptimizerSettings,
    ) -> Result<Self> {
        if witnesses.is_empty() {
            return Err(Error::invalid("at least one witness is required"));
        }
        if witnesses.len() != measured.len() {
            return Err(Error::invalid(format!(
                "{} witnesses but {} measured values",
                witnesses.len(),
                measured.len()
            )));
        }
        if measured.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("measured values must be finite"));
        }
        space.validate()?;
        settings.validate()?;
        Ok(Self {
            witnesses,
            measured,
            measure,
            space,
            settings,
        })
    }

    /// Single witness `alpha 1 - |phi><phi|` measured on a state with overlap `p`.
    pub fn projector(phi: &PureState, alpha: f64, p: f64, measure: Measure, space: SearchSpace) -> Result<Self> {
        Self::new(
            vec![projector_witness(phi, alpha)?],
            vec![alpha - p],
            measure,
            space,
            OptimizerSettings::default(),
        )
    }

    /// The GHZ-fidelity problem: witness `3/4 - |GHZ><GHZ|` with `w = 3/4 - p`.
    pub fn fidelity(p: f64, measure: Measure, space: SearchSpace) -> Result<Self> {
        Self::projector(&NamedState::Ghz.state(), 0.75, p, measure, space)
    }

    /// The off-diagonal witness with real weight `omega` at GHZ weight `p`, `w = -p`.
    pub fn skew(omega: f64, p: f64, measure: Measure, space: SearchSpace) -> Result<Self> {
        if !omega.is_finite() {
            return Err(Error::invalid("omega must be finite"));
        }
        Self::new(
            vec![skew_witness(Complex64::new(omega, 0.0))],
            vec![-p],
            measure,
            space,
            OptimizerSettings::default(),
        )
    }

    pub fn witnesses(&self) -> &[Observable] {
        &self.witnesses
    }

    pub fn measured(&self) -> &[f64] {
        &self.measured
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn settings(&self) -> &OptimizerSettings {
        &self.settings
    }

    pub fn num_witnesses(&self) -> usize {
        self.witnesses.len()
    }

    pub fn with_settings(mut self, settings: OptimizerSettings) -> Result<Self> {
        settings.validate()?;
        self.settings = settings;
        Ok(self)
    }

    pub fn with_measured(mut self, measured: Vec<f64>) -> Result<Self> {
        if measured.len() != self.witnesses.len() || measured.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("measured values do not match the witnesses"));
        }
        self.measured = measured;
        Ok(self)
    }

    pub fn with_measure(mut self, measure: Measure) -> Self {
        self.measure = measure;
        self
    }

    pub fn with_space(mut self, space: SearchSpace) -> Result<Self> {
        space.validate()?;
        self.space = space;
        Ok(self)
    }
}

/// Bound on the measure from the GHZ fidelity `p`, through the witness
/// `3/4 - |GHZ><GHZ|`.
pub fn fidelity_bound(p: f64, measure: Measure, space: SearchSpace, settings: &OptimizerSettings) -> Result<BoundResult> {
    Ok(fidelity_curve(&[p], measure, space, settings)?.remove(0))
}

/// [`fidelity_bound`] at several fidelities, sharing inner minimizations.
pub fn fidelity_curve(
    ps: &[f64],
    measure: Measure,
    space: SearchSpace,
    settings: &OptimizerSettings,
) -> Result<Vec<BoundResult>> {
    if let Some(p) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid(format!("fidelity {p} outside [0, 1]")));
    }
    let problem = BoundProblem::fidelity(0.0, measure, space)?.with_settings(settings.clone())?;
    let solver = LegendreSolver::new(&problem)?;
    ps.iter().map(|p| solver.solve(&[0.75 - p])).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Converged,
    /// Some inner minimization hit its iteration cap without converging.
    MaxIter,
    /// The supremum is not positive; the bound is clamped to zero.
    TrivialZero,
}

/// One evaluation of the dual function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub r: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    /// `max(0, sup_r g(r))`
    pub epsilon: f64,
    /// Best dual value before clamping.
    pub dual_value: f64,
    pub r_star: Vec<f64>,
    pub inner_minimizer: PureState,
    pub trace: Vec<TraceEntry>,
    pub status: Status,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_validation() {
        assert!(OptimizerSettings::default().validate().is_ok());
        let bad = OptimizerSettings {
            r_box: [1.0, -1.0],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptimizerSettings {
            restarts: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn problem_validation() {
        let ghz = NamedState::Ghz.state();
        let w = projector_witness(&ghz, 0.75).unwrap();
        assert!(BoundProblem::new(vec![], vec![], Measure::Tau3, SearchSpace::Full, Default::default()).is_err());
        assert!(BoundProblem::new(vec![w.clone()], vec![0.1, 0.2], Measure::Tau3, SearchSpace::Full, Default::default())
            .is_err());
        let skewed = SearchSpace::Span([ghz.clone(), ghz.clone()]);
        assert!(BoundProblem::new(vec![w], vec![0.1], Measure::Tau3, skewed, Default::default()).is_err());
    }

    #[test]
    fn problem_json() {
        let p = BoundProblem::fidelity(0.9, Measure::Tau3Sq, SearchSpace::ghz_w_span()).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"space\":{\"span\":["));
        assert!(text.contains("\"measure\":\"tau3sq\""));
        let back: BoundProblem = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);

        let minimal = format!(
            r#"{{"witnesses":[{}],"measured":[-0.1],"space":"symmetric"}}"#,
            serde_json::to_string(&p.witnesses()[0]).unwrap()
        );
        let q: BoundProblem = serde_json::from_str(&minimal).unwrap();
        assert_eq!(q.space(), &SearchSpace::Symmetric);
        assert_eq!(q.settings(), &OptimizerSettings::default());
        assert_eq!(q.measure(), Measure::Tau3);
    }
}
