use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{inner, symmetric_basis, Matrix8, NamedState, PureState, DIM};

const ORTHONORMAL_TOLERANCE: f64 = 1e-10;

/// Subspace of the three-qubit Hilbert space searched for pure states.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchSpace {
    /// All of `C^8`.
    #[default]
    Full,
    /// Span of `|000>, W, W̄, |111>`.
    Symmetric,
    /// Span of two orthonormal states.
    Span([PureState; 2]),
}

impl SearchSpace {
    pub fn ghz_w_span() -> Self {
        SearchSpace::Span([NamedState::Ghz.state(), NamedState::W.state()])
    }

    pub fn name(&self) -> &'static str {
        match self {
            SearchSpace::Full => "full",
            SearchSpace::Symmetric => "symmetric",
            SearchSpace::Span(_) => "span",
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if let SearchSpace::Span([a, b]) = self {
            let overlap = a.inner(b).norm();
            if overlap > ORTHONORMAL_TOLERANCE {
                return Err(Error::invalid(format!(
                    "span basis is not orthonormal (overlap {overlap:e})"
                )));
            }
        }
        Ok(())
    }
}

/// Real coordinates `x` in `R^{2n}` for a complex `n`-dimensional subspace:
/// `psi = sum_j (x_j + i x_{n+j}) b_j / |x|`.
#[derive(Clone, Debug)]
pub(crate) struct Chart {
    basis: Vec<[Complex64; DIM]>,
    identity: bool,
}

impl Chart {
    pub fn new(space: &SearchSpace) -> Result<Self> {
        space.validate()?;
        let (basis, identity) = match space {
            SearchSpace::Full => (
                (0..DIM)
                    .map(|i| *NamedState::Basis(i).state().amplitudes())
                    .collect(),
                true,
            ),
            SearchSpace::Symmetric => (
                symmetric_basis().iter().map(|s| *s.amplitudes()).collect(),
                false,
            ),
            SearchSpace::Span([a, b]) => (vec![*a.amplitudes(), *b.amplitudes()], false),
        };
        Ok(Self { basis, identity })
    }

    pub fn basis(&self) -> &[[Complex64; DIM]] {
        &self.basis
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    /// Complex dimension.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn real_dim(&self) -> usize {
        2 * self.basis.len()
    }

    /// Embeds complex coefficients into `C^8` without normalizing.
    pub fn embed(&self, coeffs: &[Complex64]) -> [Complex64; DIM] {
        if self.identity {
            let mut out = [Complex64::new(0.0, 0.0); DIM];
            out.copy_from_slice(coeffs);
            return out;
        }
        let mut out = [Complex64::new(0.0, 0.0); DIM];
        for (c, b) in coeffs.iter().zip(&self.basis) {
            for (o, v) in out.iter_mut().zip(b) {
                *o += c * v;
            }
        }
        out
    }

    pub fn coefficients(&self, x: &[f64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n).map(|j| Complex64::new(x[j], x[n + j])).collect()
    }

    /// Normalized amplitudes for chart coordinates.
    pub fn amplitudes(&self, x: &[f64]) -> [Complex64; DIM] {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let n = self.dim();
        let mut coeffs = [Complex64::new(0.0, 0.0); DIM];
        for (j, c) in coeffs.iter_mut().take(n).enumerate() {
            *c = Complex64::new(x[j], x[n + j]);
        }
        let mut amps = self.embed(&coeffs[..n]);
        let s = 1.0 / norm;
        amps.iter_mut().for_each(|a| *a *= s);
        amps
    }

    pub fn state(&self, x: &[f64]) -> PureState {
        PureState::from_normalized_unchecked(self.amplitudes(x))
    }

    /// Coordinates of the normalized projection of `s`, if it is not negligible.
    pub fn coordinates_of(&self, s: &PureState) -> Option<Vec<f64>> {
        let n = self.dim();
        let coeffs: Vec<Complex64> = self.basis.iter().map(|b| inner(b, s.amplitudes())).collect();
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            return None;
        }
        let mut x = vec![0.0; 2 * n];
        for (j, c) in coeffs.iter().enumerate() {
            x[j] = c.re / norm;
            x[n + j] = c.im / norm;
        }
        Some(x)
    }

    /// Matrix elements `<b_i|M|b_j>` of an operator inside the subspace.
    pub fn restrict(&self, m: &Matrix8) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..DIM {
                for b in 0..DIM {
                    acc += self.basis[i][a].conj() * m[(a, b)] * self.basis[j][b];
                }
            }
            acc
        })
    }
}

pub(crate) fn project_to_sphere(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 1e-300 {
        x.iter_mut().for_each(|v| *v /= norm);
    } else {
        x.iter_mut().for_each(|v| *v = 0.0);
        x[0] = 1.0;
    }
}
