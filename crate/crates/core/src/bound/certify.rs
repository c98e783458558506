use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::{Matrix8, Measure, NamedState, Observable, PureState};

/// Max-norm deviation from the target below which a decomposition certifies.
pub const DECOMPOSITION_RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Pure-state ensemble `{p_i, |psi_i>}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    weights: Vec<f64>,
    states: Vec<PureState>,
}

impl Decomposition {
    pub fn new(weights: Vec<f64>, states: Vec<PureState>) -> Result<Self> {
        if weights.len() != states.len() || weights.is_empty() {
            return Err(Error::invalid("weights and states must be nonempty and of equal length"));
        }
        if weights.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::invalid("weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { weights, states })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn density(&self) -> Matrix8 {
        mixture_density(&self.weights, &self.states)
    }

    /// `sum_i p_i <psi_i|W|psi_i>`
    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        self.weights
            .iter()
            .zip(&self.states)
            .map(|(p, s)| obs.expectation(s).map(|v| p * v))
            .sum()
    }
}

/// `sum_i p_i |psi_i><psi_i|` without validating the weights.
pub fn mixture_density(weights: &[f64], states: &[PureState]) -> Matrix8 {
    let mut rho = Matrix8::zeros();
    for (p, s) in weights.iter().zip(states) {
        rho += Observable::projector(s).matrix() * Complex64::new(*p, 0.0);
    }
    rho
}

/// `p |GHZ><GHZ| + (1-p) |W><W|`
pub fn ghz_w_mixture(p: f64) -> Matrix8 {
    mixture_density(&[p, 1.0 - p], &[NamedState::Ghz.state(), NamedState::W.state()])
}

/// `gamma |GHZ><GHZ| + (1 - gamma) 1/8`
pub fn noisy_ghz_state(gamma: f64) -> Result<Matrix8> {
    check_unit(gamma)?;
    Ok(Observable::projector(&NamedState::Ghz.state()).matrix() * Complex64::new(gamma, 0.0)
        + Matrix8::identity() * Complex64::new((1.0 - gamma) / 8.0, 0.0))
}

fn check_unit(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma = {gamma} outside [0, 1]")));
    }
    Ok(())
}

/// GHZ fidelity `gamma + (1 - gamma)/8` of the noisy GHZ state.
pub fn noisy_ghz_fidelity(gamma: f64) -> Result<f64> {
    check_unit(gamma)?;
    Ok(gamma + (1.0 - gamma) / 8.0)
}

/// Exact rational version of [`noisy_ghz_fidelity`] for `gamma = num / den`,
/// returned in lowest terms.
pub fn noisy_ghz_fidelity_ratio(num: i64, den: i64) -> Result<(i64, i64)> {
    if den <= 0 || num < 0 || num > den {
        return Err(Error::invalid(format!("gamma = {num}/{den} outside [0, 1]")));
    }
    // gamma + (1 - gamma)/8 = (7 num + den) / (8 den)
    let (n, d) = (7 * num + den, 8 * den);
    let g = gcd(n, d);
    Ok((n / g, d / g))
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate {
    /// `sum_i p_i E(psi_i)`, an upper bound on the convex roof when `valid`.
    pub upper_bound: f64,
    /// Max-norm of `sum_i p_i |psi_i><psi_i| - target`.
    pub residual: f64,
    pub valid: bool,
}

/// Average measure of a decomposition and how well it reproduces `target`.
pub fn certify_decomposition(dec: &Decomposition, target: &Matrix8, measure: Measure) -> Certificate {
    let residual = (dec.density() - target)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let upper_bound = dec
        .weights
        .iter()
        .zip(&dec.states)
        .map(|(p, s)| p * measure.of(s))
        .sum();
    Certificate {
        upper_bound,
        residual,
        valid: residual <= DECOMPOSITION_RESIDUAL_TOLERANCE,
    }
}
