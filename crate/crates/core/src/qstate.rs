//! Three-qubit pure states, observables and the three-tangle.
//!
//! Amplitudes are stored in the product basis with index
//! `i = 4 * i_A + 2 * i_B + i_C`, i.e. `|000>, |001>, ..., |111>` where the
//! leftmost bit belongs to qubit A. The monomials `d1, d2, d3` of the tangle
//! depend on this convention; the tangle itself does not.

use std::fmt;

use nalgebra::{Matrix2, SMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hilbert-space dimension of three qubits.
pub const DIM: usize = 8;

/// Accepted deviation of `|psi|^2` from one on public construction.
pub const NORM_TOLERANCE: f64 = 1e-9;

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const UNITARY_TOLERANCE: f64 = 1e-10;
const SYMMETRIC_FLOOR: f64 = 1e-8;

pub type Matrix8 = SMatrix<Complex64, DIM, DIM>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn norm_sqr(amps: &[Complex64; DIM]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// A normalized three-qubit pure state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub struct PureState {
    amps: [Complex64; DIM],
}

impl PureState {
    /// Strict constructor: the input must already be normalized to within
    /// [`NORM_TOLERANCE`]. The stored amplitudes are rescaled to unit norm.
    pub fn new(amps: [Complex64; DIM]) -> Result<Self> {
        let n = norm_sqr(&amps);
        if !n.is_finite() || (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sqr: n });
        }
        Ok(Self::rescale(amps, n))
    }

    /// Renormalizing constructor for optimizer-internal vectors.
    pub fn normalized(amps: [Complex64; DIM]) -> Result<Self> {
        let n = norm_sqr(&amps);
        if !n.is_finite() || n < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self::rescale(amps, n))
    }

    fn rescale(mut amps: [Complex64; DIM], n: f64) -> Self {
        let s = n.sqrt().recip();
        for a in amps.iter_mut() {
            *a *= s;
        }
        Self { amps }
    }

    pub fn from_slice(amps: &[Complex64]) -> Result<Self> {
        let arr: [Complex64; DIM] = amps.try_into().map_err(|_| Error::Dimension {
            expected: DIM,
            found: amps.len(),
        })?;
        Self::new(arr)
    }

    /// Computational basis state `|i>`.
    pub fn basis(index: usize) -> Result<Self> {
        if index >= DIM {
            return Err(Error::invalid(format!("basis index {index} out of range")));
        }
        let mut amps = [ZERO; DIM];
        amps[index] = ONE;
        Ok(Self { amps })
    }

    pub fn amplitudes(&self) -> &[Complex64; DIM] {
        &self.amps
    }

    pub fn amplitude(&self, a: usize, b: usize, c: usize) -> Complex64 {
        self.amps[4 * a + 2 * b + c]
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> Complex64 {
        inner(&self.amps, &other.amps)
    }

    /// `|<self|other>|^2`
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Multiply by a global phase `e^{i theta}`.
    pub fn with_phase(&self, theta: f64) -> PureState {
        let ph = Complex64::from_polar(1.0, theta);
        let mut amps = self.amps;
        for a in amps.iter_mut() {
            *a *= ph;
        }
        PureState { amps }
    }

    /// Normalized superposition `a |x> + b |y>`.
    pub fn superpose(a: Complex64, x: &PureState, b: Complex64, y: &PureState) -> Result<Self> {
        let mut amps = [ZERO; DIM];
        for (i, v) in amps.iter_mut().enumerate() {
            *v = a * x.amps[i] + b * y.amps[i];
        }
        Self::normalized(amps)
    }

    /// Permute the three qubits: qubit `k` of the result is qubit `perm[k]` of `self`.
    pub fn permute_qubits(&self, perm: [usize; 3]) -> Result<PureState> {
        let mut seen = [false; 3];
        for &p in &perm {
            if p > 2 || seen[p] {
                return Err(Error::invalid(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let mut amps = [ZERO; DIM];
        for (idx, out) in amps.iter_mut().enumerate() {
            let bits = [(idx >> 2) & 1, (idx >> 1) & 1, idx & 1];
            let mut src = [0usize; 3];
            for k in 0..3 {
                src[perm[k]] = bits[k];
            }
            *out = self.amps[4 * src[0] + 2 * src[1] + src[2]];
        }
        Ok(PureState { amps })
    }

    pub(crate) fn from_normalized_unchecked(amps: [Complex64; DIM]) -> Self {
        Self { amps }
    }
}

pub(crate) fn inner(x: &[Complex64; DIM], y: &[Complex64; DIM]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Serialized form `{"amplitudes": [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct StateJson {
    amplitudes: Vec<[f64; 2]>,
}

impl TryFrom<StateJson> for PureState {
    type Error = Error;

    fn try_from(value: StateJson) -> Result<Self> {
        let amps: Vec<Complex64> = value
            .amplitudes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        PureState::from_slice(&amps)
    }
}

impl From<PureState> for StateJson {
    fn from(s: PureState) -> Self {
        StateJson {
            amplitudes: s.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

/// Named reference states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedState {
    Ghz,
    GhzMinus,
    W,
    WBar,
    Basis(usize),
}

impl NamedState {
    pub fn state(self) -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let t = 1.0 / 3f64.sqrt();
        let mut amps = [ZERO; DIM];
        match self {
            NamedState::Ghz => {
                amps[0] = Complex64::new(h, 0.0);
                amps[7] = Complex64::new(h, 0.0);
            }
            NamedState::GhzMinus => {
                amps[0] = Complex64::new(h, 0.0);
                amps[7] = Complex64::new(-h, 0.0);
            }
            NamedState::W => {
                for i in [1, 2, 4] {
                    amps[i] = Complex64::new(t, 0.0);
                }
            }
            NamedState::WBar => {
                for i in [6, 5, 3] {
                    amps[i] = Complex64::new(t, 0.0);
                }
            }
            NamedState::Basis(i) => amps[i % DIM] = ONE,
        }
        PureState { amps }
    }
}

impl std::str::FromStr for NamedState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "ghz" => Ok(NamedState::Ghz),
            "ghz-" | "ghz_minus" | "ghzminus" => Ok(NamedState::GhzMinus),
            "w" => Ok(NamedState::W),
            "wbar" | "w_bar" | "w-bar" => Ok(NamedState::WBar),
            _ if lower.len() == 3 && lower.chars().all(|c| c == '0' || c == '1') => {
                Ok(NamedState::Basis(usize::from_str_radix(&lower, 2).unwrap()))
            }
            _ => Err(Error::invalid(format!("unknown state name {s:?}"))),
        }
    }
}

/// The intermediate monomial sums of the three-tangle and its value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TangleBreakdown {
    #[serde(serialize_with = "ser_complex")]
    pub d1: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub d2: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub d3: Complex64,
    pub tau3: f64,
    pub tau3_sq: f64,
}

fn ser_complex<S: serde::Serializer>(c: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [c.re, c.im].serialize(s)
}

#[inline]
fn tangle_monomials(p: &[Complex64; DIM]) -> (Complex64, Complex64, Complex64) {
    let (p000, p001, p010, p011) = (p[0], p[1], p[2], p[3]);
    let (p100, p101, p110, p111) = (p[4], p[5], p[6], p[7]);
    let d1 = p000 * p000 * p111 * p111
        + p001 * p001 * p110 * p110
        + p010 * p010 * p101 * p101
        + p100 * p100 * p011 * p011;
    let a = p000 * p111;
    let b = p011 * p100;
    let c = p101 * p010;
    let d = p110 * p001;
    let d2 = a * b + a * c + a * d + b * c + b * d + c * d;
    let d3 = p000 * p110 * p101 * p011 + p111 * p001 * p010 * p100;
    (d1, d2, d3)
}

/// Three-tangle of a normalized amplitude vector, without validation.
#[inline]
pub(crate) fn tau3_of(p: &[Complex64; DIM]) -> f64 {
    let (d1, d2, d3) = tangle_monomials(p);
    4.0 * (d1 - 2.0 * d2 + 4.0 * d3).norm()
}

/// `H = d1 - 2 d2 + 4 d3` and its holomorphic gradient `dH/da_m`.
///
/// With the pair products `a = p000 p111, b = p011 p100, c = p010 p101,
/// d = p001 p110` and `s = a + b + c + d`, `H = 2 (a^2 + b^2 + c^2 + d^2) - s^2
/// + 4 (p000 p011 p101 p110 + p001 p010 p100 p111)`.
pub(crate) fn hyperdeterminant_gradient(p: &[Complex64]) -> (Complex64, [Complex64; DIM]) {
    let a = p[0] * p[7];
    let b = p[3] * p[4];
    let c = p[5] * p[2];
    let d = p[6] * p[1];
    let s = a + b + c + d;
    let even = p[0] * p[3] * p[5] * p[6];
    let odd = p[1] * p[2] * p[4] * p[7];
    let h = (a * a + b * b + c * c + d * d) * 2.0 - s * s + (even + odd) * 4.0;
    let (fa, fb, fc, fd) = (a * 4.0 - s * 2.0, b * 4.0 - s * 2.0, c * 4.0 - s * 2.0, d * 4.0 - s * 2.0);
    let grad = [
        fa * p[7] + p[3] * p[5] * p[6] * 4.0,
        fd * p[6] + p[2] * p[4] * p[7] * 4.0,
        fc * p[5] + p[1] * p[4] * p[7] * 4.0,
        fb * p[4] + p[0] * p[5] * p[6] * 4.0,
        fb * p[3] + p[1] * p[2] * p[7] * 4.0,
        fc * p[2] + p[0] * p[3] * p[6] * 4.0,
        fd * p[1] + p[0] * p[3] * p[5] * 4.0,
        fa * p[0] + p[1] * p[2] * p[4] * 4.0,
    ];
    (h, grad)
}

/// Three-tangle `4 |d1 - 2 d2 + 4 d3|` of a pure state.
pub fn three_tangle(state: &PureState) -> TangleBreakdown {
    let (d1, d2, d3) = tangle_monomials(&state.amps);
    let tau3 = 4.0 * (d1 - 2.0 * d2 + 4.0 * d3).norm();
    TangleBreakdown {
        d1,
        d2,
        d3,
        tau3,
        tau3_sq: tau3 * tau3,
    }
}

/// Validating variant of [`three_tangle`] for raw amplitudes.
pub fn three_tangle_of(amps: &[Complex64]) -> Result<TangleBreakdown> {
    Ok(three_tangle(&PureState::from_slice(amps)?))
}

/// Pure-state entanglement measure whose convex roof is bounded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    #[default]
    Tau3,
    #[serde(alias = "tau3_sq")]
    Tau3Sq,
}

impl Measure {
    pub fn of(self, state: &PureState) -> f64 {
        self.of_amplitudes(&state.amps)
    }

    #[inline]
    pub(crate) fn of_amplitudes(self, amps: &[Complex64; DIM]) -> f64 {
        let t = tau3_of(amps);
        match self {
            Measure::Tau3 => t,
            Measure::Tau3Sq => t * t,
        }
    }

    /// Apply the measure to a known three-tangle value.
    pub fn from_tau3(self, tau3: f64) -> f64 {
        match self {
            Measure::Tau3 => tau3,
            Measure::Tau3Sq => tau3 * tau3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::Tau3 => "tau3",
            Measure::Tau3Sq => "tau3sq",
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tau3" => Ok(Measure::Tau3),
            "tau3sq" | "tau3_sq" => Ok(Measure::Tau3Sq),
            _ => Err(Error::invalid(format!("unknown measure {s:?}"))),
        }
    }
}

/// Hermitian 8x8 operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ObservableJson", into = "ObservableJson")]
pub struct Observable {
    matrix: Matrix8,
    label: String,
}

impl Observable {
    /// Checks hermiticity to 1e-12 (scaled by the largest entry) and stores
    /// the exactly Hermitian part.
    pub fn new(matrix: Matrix8, label: impl Into<String>) -> Result<Self> {
        let scale = matrix.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        let deviation = (matrix - matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max);
        if !deviation.is_finite() || deviation > HERMITIAN_TOLERANCE * scale {
            return Err(Error::NotHermitian { deviation });
        }
        let matrix = (matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    pub fn identity() -> Self {
        Self {
            matrix: Matrix8::identity(),
            label: "identity".into(),
        }
    }

    /// `|phi><phi|`
    pub fn projector(phi: &PureState) -> Self {
        let v = nalgebra::SVector::<Complex64, DIM>::from_column_slice(&phi.amps);
        Self {
            matrix: v * v.adjoint(),
            label: "projector".into(),
        }
    }

    pub fn matrix(&self) -> &Matrix8 {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `self + c * 1`
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            matrix: self.matrix + Matrix8::identity() * Complex64::new(c, 0.0),
            label: self.label.clone(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            matrix: self.matrix * Complex64::new(c, 0.0),
            label: self.label.clone(),
        }
    }

    pub fn add(&self, other: &Observable) -> Self {
        Self {
            matrix: self.matrix + other.matrix,
            label: format!("{}+{}", self.label, other.label),
        }
    }

    /// `<psi|W|psi>`; the imaginary residue must vanish to 1e-9.
    pub fn expectation(&self, state: &PureState) -> Result<f64> {
        let z = quadratic_form(&self.matrix, &state.amps);
        if z.im.abs() > 1e-9 {
            return Err(Error::Internal(format!(
                "imaginary expectation value {:e} for Hermitian {}",
                z.im, self.label
            )));
        }
        Ok(z.re)
    }

    /// Smallest and largest eigenvalue.
    pub fn spectral_range(&self) -> (f64, f64) {
        let eig = SymmetricEigen::new(self.matrix);
        let vals = eig.eigenvalues;
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

pub(crate) fn quadratic_form(m: &Matrix8, v: &[Complex64; DIM]) -> Complex64 {
    let mut acc = ZERO;
    for i in 0..DIM {
        let mut row = ZERO;
        for j in 0..DIM {
            row += m[(i, j)] * v[j];
        }
        acc += v[i].conj() * row;
    }
    acc
}

#[derive(Serialize, Deserialize)]
struct ObservableJson {
    matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    label: String,
}

impl TryFrom<ObservableJson> for Observable {
    type Error = Error;

    fn try_from(value: ObservableJson) -> Result<Self> {
        if value.matrix.len() != DIM {
            return Err(Error::Dimension {
                expected: DIM,
                found: value.matrix.len(),
            });
        }
        let mut m = Matrix8::zeros();
        for (i, row) in value.matrix.iter().enumerate() {
            if row.len() != DIM {
                return Err(Error::Dimension {
                    expected: DIM,
                    found: row.len(),
                });
            }
            for (j, [re, im]) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(*re, *im);
            }
        }
        Observable::new(m, value.label)
    }
}

impl From<Observable> for ObservableJson {
    fn from(o: Observable) -> Self {
        let matrix = (0..DIM)
            .map(|i| (0..DIM).map(|j| [o.matrix[(i, j)].re, o.matrix[(i, j)].im]).collect())
            .collect();
        ObservableJson {
            matrix,
            label: o.label,
        }
    }
}

/// Projector witness `alpha * 1 - |phi><phi|`.
pub fn projector_witness(phi: &PureState, alpha: f64) -> Result<Observable> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha = {alpha} outside [0, 1]")));
    }
    let p = Observable::projector(phi);
    Ok(Observable {
        matrix: Matrix8::identity() * Complex64::new(alpha, 0.0) - p.matrix,
        label: format!("{alpha}*1-proj"),
    })
}

/// Off-diagonal witness `-|GHZ><GHZ| - omega |GHZ><W| - conj(omega) |W><GHZ|`.
pub fn skew_witness(omega: Complex64) -> Observable {
    let g = NamedState::Ghz.state();
    let w = NamedState::W.state();
    let gv = nalgebra::SVector::<Complex64, DIM>::from_column_slice(&g.amps);
    let wv = nalgebra::SVector::<Complex64, DIM>::from_column_slice(&w.amps);
    let m = -(gv * gv.adjoint()) - (gv * wv.adjoint()) * omega - (wv * gv.adjoint()) * omega.conj();
    Observable {
        matrix: m,
        label: format!("skew({},{})", omega.re, omega.im),
    }
}

fn unitary_deviation(u: &Matrix2<Complex64>) -> f64 {
    (u.adjoint() * u - Matrix2::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// `(u_a ⊗ u_b ⊗ u_c) |psi>`
pub fn apply_local_unitary(
    state: &PureState,
    u_a: &Matrix2<Complex64>,
    u_b: &Matrix2<Complex64>,
    u_c: &Matrix2<Complex64>,
) -> Result<PureState> {
    for (index, u) in [u_a, u_b, u_c].into_iter().enumerate() {
        let deviation = unitary_deviation(u);
        if !(deviation <= UNITARY_TOLERANCE) {
            return Err(Error::NotUnitary { index, deviation });
        }
    }
    let mut amps = [ZERO; DIM];
    for (out, o) in amps.iter_mut().enumerate() {
        let (oa, ob, oc) = ((out >> 2) & 1, (out >> 1) & 1, out & 1);
        let mut acc = ZERO;
        for (inp, a) in state.amps.iter().enumerate() {
            let (ia, ib, ic) = ((inp >> 2) & 1, (inp >> 1) & 1, inp & 1);
            acc += u_a[(oa, ia)] * u_b[(ob, ib)] * u_c[(oc, ic)] * a;
        }
        *o = acc;
    }
    PureState::normalized(amps)
}

/// Orthonormal basis `{|000>, W, W̄, |111>}` of the permutation-symmetric subspace.
pub fn symmetric_basis() -> [PureState; 4] {
    [
        NamedState::Basis(0).state(),
        NamedState::W.state(),
        NamedState::WBar.state(),
        NamedState::Basis(7).state(),
    ]
}

/// Coherent projection onto the permutation-symmetric subspace, renormalized.
pub fn permutation_symmetrize(state: &PureState) -> Result<PureState> {
    let mut amps = [ZERO; DIM];
    for b in symmetric_basis() {
        let c = b.inner(state);
        for (i, a) in amps.iter_mut().enumerate() {
            *a += c * b.amps[i];
        }
    }
    if norm_sqr(&amps).sqrt() < SYMMETRIC_FLOOR {
        return Err(Error::NoSymmetricComponent);
    }
    PureState::normalized(amps)
}

/// Weight `|P_sym psi|^2` of a state in the symmetric subspace.
pub fn symmetric_weight(state: &PureState) -> f64 {
    symmetric_basis().iter().map(|b| b.fidelity(state)).sum()
}
