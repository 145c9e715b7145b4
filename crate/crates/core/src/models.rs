//! Basis enumeration and Hamiltonian assembly for the three spin-boson
//! models:
//!
//! * `Su11`: ω₀K₀ + ωb†b + (λ/√M)(bK₊ + b†K₋), one irrep of SU(1,1) with
//!   Bergmann index k ∈ {1/4, 3/4}, block of fixed M = 2(N_b + n).
//! * `JaynesCummings`: ω₀J₀ + ωb†b + (λ/√M)(bJ₊ + b†J₋), spin j = M/4,
//!   block of fixed M = 2(N_b + m + j).
//! * `Dicke`: ω₀J₀ + ωb†b + (λ/√M)(b + b†)(J₊ + J₋), M = 4j, one parity
//!   block Π = (−1)^(N_b+m+j), photon number truncated at `n_trunc`.
//!
//! Hamiltonians are stored unscaled as a λ-independent diagonal plus the
//! interaction couplings at unit λ, so the same basis serves a whole λ scan.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::algebra::{su11_raising, Spin};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Su11,
    JaynesCummings,
    Dicke,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Su11 => "su11",
            ModelKind::JaynesCummings => "jaynes-cummings",
            ModelKind::Dicke => "dicke",
        }
    }

    pub fn is_integrable(self) -> bool {
        !matches!(self, ModelKind::Dicke)
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "su11" | "su(1,1)" => Ok(ModelKind::Su11),
            "jc" | "jaynes-cummings" | "jaynes_cummings" => Ok(ModelKind::JaynesCummings),
            "dicke" => Ok(ModelKind::Dicke),
            other => Err(invalid("model.kind", format!("unknown model `{other}`"))),
        }
    }
}

/// Bergmann index of the single-boson-pair realization: k = 1/4 for the
/// even a-boson tower, k = 3/4 for the odd one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BergmannIndex {
    Quarter,
    ThreeQuarters,
}

impl BergmannIndex {
    pub fn value(self) -> f64 {
        match self {
            BergmannIndex::Quarter => 0.25,
            BergmannIndex::ThreeQuarters => 0.75,
        }
    }

    pub fn from_value(k: f64) -> Result<Self> {
        if (k - 0.25).abs() < 1e-12 {
            Ok(BergmannIndex::Quarter)
        } else if (k - 0.75).abs() < 1e-12 {
            Ok(BergmannIndex::ThreeQuarters)
        } else {
            Err(invalid("model.k", format!("Bergmann index must be 1/4 or 3/4, got {k}")))
        }
    }

    /// Number of a-bosons in the lowest weight state, (4k−1)/2.
    pub fn a_boson_offset(self) -> f64 {
        (4.0 * self.value() - 1.0) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> i32 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }

    pub fn from_sign(sign: i64) -> Result<Self> {
        match sign {
            1 => Ok(Parity::Even),
            -1 => Ok(Parity::Odd),
            other => Err(invalid("model.parity", format!("parity must be +1 or -1, got {other}"))),
        }
    }

    /// Parity (−1)^(N_b + m + j) of a Dicke basis state, with `m_index` = m + j.
    pub fn of_state(n_b: usize, m_index: usize) -> Self {
        if (n_b + m_index) % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Everything needed to build one Hamiltonian block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub omega: f64,
    pub omega0: f64,
    pub lambda: f64,
    /// Size parameter M: the conserved charge for `Su11`/`JaynesCummings`,
    /// 4j for `Dicke`.
    pub size: u32,
    /// Only used by `Su11`.
    pub k: BergmannIndex,
    /// Dicke parity block; `None` keeps both sectors.
    pub parity: Option<Parity>,
    /// Dicke photon cutoff.
    pub n_trunc: usize,
}

impl ModelParams {
    /// SU(1,1) model with ω₀ − ω = 1 = ω.
    pub fn su11(size: u32, lambda: f64) -> Self {
        Self {
            kind: ModelKind::Su11,
            omega: 1.0,
            omega0: 2.0,
            lambda,
            size,
            k: BergmannIndex::Quarter,
            parity: None,
            n_trunc: 0,
        }
    }

    /// Jaynes-Cummings model with ω − ω₀ = 1 = ω₀ and j = size/4.
    pub fn jaynes_cummings(size: u32, lambda: f64) -> Self {
        Self {
            kind: ModelKind::JaynesCummings,
            omega: 2.0,
            omega0: 1.0,
            lambda,
            size,
            k: BergmannIndex::Quarter,
            parity: None,
            n_trunc: 0,
        }
    }

    /// Dicke model at resonance ω = 1 = ω₀, in the parity block of the
    /// λ = 0 ground state.
    pub fn dicke(j: f64, n_trunc: usize, lambda: f64) -> Result<Self> {
        let spin = Spin::new(j)?;
        let mut params = Self {
            kind: ModelKind::Dicke,
            omega: 1.0,
            omega0: 1.0,
            lambda,
            size: 2 * spin.twice(),
            k: BergmannIndex::Quarter,
            parity: None,
            n_trunc,
        };
        params.parity = Some(params.ground_parity());
        Ok(params)
    }

    /// Default parameters of `kind` following the usual frequency settings.
    pub fn default_for(kind: ModelKind, size: u32, lambda: f64, n_trunc: usize) -> Result<Self> {
        match kind {
            ModelKind::Su11 => Ok(Self::su11(size, lambda)),
            ModelKind::JaynesCummings => Ok(Self::jaynes_cummings(size, lambda)),
            ModelKind::Dicke => Self::dicke(f64::from(size) / 4.0, n_trunc, lambda),
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_frequencies(mut self, omega: f64, omega0: f64) -> Self {
        self.omega = omega;
        self.omega0 = omega0;
        self
    }

    pub fn with_k(mut self, k: BergmannIndex) -> Self {
        self.k = k;
        self
    }

    pub fn with_parity(mut self, parity: Option<Parity>) -> Self {
        self.parity = parity;
        self
    }

    pub fn with_n_trunc(mut self, n_trunc: usize) -> Self {
        self.n_trunc = n_trunc;
        self
    }

    /// M as a float; energies scale with it.
    pub fn size_parameter(&self) -> f64 {
        f64::from(self.size)
    }

    /// Spin j = M/4 of the SU(2) models.
    pub fn spin(&self) -> Result<Spin> {
        match self.kind {
            ModelKind::Su11 => Err(Error::Unsupported("the SU(1,1) model has no spin".into())),
            _ => {
                if self.size == 0 || self.size % 2 != 0 {
                    return Err(invalid(
                        "model.size",
                        format!("size must be a positive even integer (2j integer), got {}", self.size),
                    ));
                }
                Spin::from_twice(self.size / 2)
            }
        }
    }

    /// Parity of the λ = 0 ground state |N_b = 0⟩|j, −j⟩.
    pub fn ground_parity(&self) -> Parity {
        Parity::of_state(0, 0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(invalid("model.omega", format!("must be positive, got {}", self.omega)));
        }
        if !(self.omega0 > 0.0) || !self.omega0.is_finite() {
            return Err(invalid("model.omega0", format!("must be positive, got {}", self.omega0)));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid("model.lambda", format!("must be non-negative, got {}", self.lambda)));
        }
        if self.size == 0 || self.size % 2 != 0 {
            return Err(invalid(
                "model.size",
                format!("must be a positive even integer, got {}", self.size),
            ));
        }
        if self.kind == ModelKind::Dicke && self.n_trunc == 0 {
            return Err(invalid("model.n_trunc", "Dicke model needs a photon cutoff n_trunc >= 1"));
        }
        Ok(())
    }
}

/// Product state |N_b⟩ ⊗ |inner⟩ where `inner` is n for SU(1,1) and the
/// index m + j for SU(2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisState {
    pub n_b: usize,
    pub inner: usize,
}

/// Ordered basis of one symmetry block.
///
/// Su11 and Jaynes-Cummings states are ordered by ascending inner weight
/// (n or m), i.e. descending photon number, so the Hamiltonian is
/// tridiagonal. Dicke states are ordered by (N_b, m).
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    pub states: Vec<BasisState>,
    pub params: ModelParams,
}

impl BasisSet {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Inner quantum number: n for Su11, m for the SU(2) models.
    pub fn inner_value(&self, i: usize) -> f64 {
        let s = self.states[i];
        match self.params.kind {
            ModelKind::Su11 => s.inner as f64,
            _ => s.inner as f64 - f64::from(self.params.size) / 4.0,
        }
    }

    /// (N_b, n) or (N_b, m) of state `i`.
    pub fn label(&self, i: usize) -> (usize, f64) {
        (self.states[i].n_b, self.inner_value(i))
    }

    /// Eigenvalue of K₀ (k + n) or J₀ (m).
    pub fn weight(&self, i: usize) -> f64 {
        match self.params.kind {
            ModelKind::Su11 => self.params.k.value() + self.states[i].inner as f64,
            _ => self.inner_value(i),
        }
    }

    pub fn position(&self, state: BasisState) -> Option<usize> {
        match self.params.kind {
            ModelKind::Dicke => self.states.binary_search(&state).ok(),
            _ => self
                .states
                .get(state.inner)
                .filter(|s| **s == state)
                .map(|_| state.inner),
        }
    }
}

pub fn enumerate_basis(params: &ModelParams) -> Result<BasisSet> {
    params.validate()?;
    let states = match params.kind {
        ModelKind::Su11 => {
            let half = (params.size / 2) as usize;
            (0..=half).map(|n| BasisState { n_b: half - n, inner: n }).collect()
        }
        ModelKind::JaynesCummings => {
            let twice_j = params.spin()?.twice() as usize;
            (0..=twice_j)
                .map(|idx| BasisState {
                    n_b: twice_j - idx,
                    inner: idx,
                })
                .collect()
        }
        ModelKind::Dicke => {
            let dim_spin = params.spin()?.dim();
            let mut states = Vec::with_capacity((params.n_trunc + 1) * dim_spin / 2 + 1);
            for n_b in 0..=params.n_trunc {
                for idx in 0..dim_spin {
                    if params.parity.is_none_or(|p| Parity::of_state(n_b, idx) == p) {
                        states.push(BasisState { n_b, inner: idx });
                    }
                }
            }
            states
        }
    };
    Ok(BasisSet {
        states,
        params: *params,
    })
}

/// One off-diagonal entry (row < col) of the interaction at unit λ, unscaled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// H = diag(free) + λ·H′ on a basis block.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    basis: BasisSet,
    free: Vec<f64>,
    interaction: Vec<Coupling>,
    lambda: f64,
    scaled: bool,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn params(&self) -> &ModelParams {
        &self.basis.params
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    /// The size parameter M dividing energies in the scaled form.
    pub fn size_parameter(&self) -> f64 {
        self.basis.params.size_parameter()
    }

    fn entry_scale(&self) -> f64 {
        if self.scaled {
            1.0 / self.size_parameter()
        } else {
            1.0
        }
    }

    /// Same block at a different coupling; the basis and couplings are reused.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        let mut h = self.clone();
        h.lambda = lambda;
        h.basis.params.lambda = lambda;
        h
    }

    /// Unscaled λ-independent diagonal ω₀w + ωN_b.
    pub fn free_diagonal(&self) -> &[f64] {
        &self.free
    }

    /// Unscaled interaction couplings at λ = 1.
    pub fn interaction(&self) -> &[Coupling] {
        &self.interaction
    }

    /// Matrix entry (i, j) honoring the scaled flag.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let value = if i == j {
            self.free[i]
        } else {
            let (row, col) = if i < j { (i, j) } else { (j, i) };
            self.interaction
                .iter()
                .find(|c| c.row == row && c.col == col)
                .map_or(0.0, |c| self.lambda * c.value)
        };
        value * self.entry_scale()
    }

    /// Dense matrix honoring the scaled flag.
    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.dim();
        let s = self.entry_scale();
        let mut m = Array2::zeros((n, n));
        for (i, &d) in self.free.iter().enumerate() {
            m[[i, i]] = d * s;
        }
        for c in &self.interaction {
            let v = self.lambda * c.value * s;
            m[[c.row, c.col]] += v;
            m[[c.col, c.row]] += v;
        }
        m
    }

    /// Unscaled dense matrix in row-major order.
    pub(crate) fn dense_unscaled(&self) -> Vec<f64> {
        let n = self.dim();
        let mut m = vec![0.0; n * n];
        for (i, &d) in self.free.iter().enumerate() {
            m[i * n + i] = d;
        }
        for c in &self.interaction {
            let v = self.lambda * c.value;
            m[c.row * n + c.col] += v;
            m[c.col * n + c.row] += v;
        }
        m
    }

    pub fn is_tridiagonal(&self) -> bool {
        self.interaction.iter().all(|c| c.col == c.row + 1)
    }

    /// Unscaled (diagonal, off-diagonal) when the matrix is tridiagonal.
    pub fn tridiagonal_parts(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if !self.is_tridiagonal() {
            return None;
        }
        let n = self.dim();
        let mut off = vec![0.0; n.saturating_sub(1)];
        for c in &self.interaction {
            off[c.row] += self.lambda * c.value;
        }
        Some((self.free.clone(), off))
    }

    /// y = H x with the unscaled matrix.
    pub fn apply_unscaled(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.free) {
            *yi = d * xi;
        }
        for c in &self.interaction {
            let v = self.lambda * c.value;
            y[c.row] += v * x[c.col];
            y[c.col] += v * x[c.row];
        }
    }

    /// ⟨x|H′|x⟩ for the unscaled interaction at unit λ.
    pub fn interaction_expectation(&self, x: &[f64]) -> f64 {
        self.interaction
            .iter()
            .map(|c| 2.0 * c.value * x[c.row] * x[c.col])
            .sum()
    }

    /// ⟨x|H|x⟩ unscaled.
    pub fn expectation(&self, x: &[f64]) -> f64 {
        let diag: f64 = self.free.iter().zip(x).map(|(d, xi)| d * xi * xi).sum();
        diag + self.lambda * self.interaction_expectation(x)
    }

    pub fn trace_unscaled(&self) -> f64 {
        self.free.iter().sum()
    }
}

/// Diagonal element ω₀w + ωN_b of a basis state.
fn free_energy(params: &ModelParams, state: BasisState) -> f64 {
    let weight = match params.kind {
        ModelKind::Su11 => params.k.value() + state.inner as f64,
        _ => state.inner as f64 - f64::from(params.size) / 4.0,
    };
    params.omega0 * weight + params.omega * state.n_b as f64
}

/// Interaction matrix element ⟨a|H′|b⟩ at unit λ (unscaled) between two
/// arbitrary product states of the model's Hilbert space.
pub fn interaction_element(params: &ModelParams, a: BasisState, b: BasisState) -> f64 {
    let coupling = 1.0 / params.size_parameter().sqrt();
    match params.kind {
        ModelKind::Su11 | ModelKind::JaynesCummings => {
            // ⟨N_b−1, w+1|bX₊|N_b, w⟩ and its transpose.
            let hi = if a.n_b == b.n_b + 1 && b.inner == a.inner + 1 {
                a
            } else if b.n_b == a.n_b + 1 && a.inner == b.inner + 1 {
                b
            } else {
                return 0.0;
            };
            let ladder = match params.kind {
                ModelKind::Su11 => su11_raising(params.k.value(), hi.inner),
                _ => {
                    let j = f64::from(params.size) / 4.0;
                    let m = hi.inner as f64 - j;
                    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
                }
            };
            coupling * (hi.n_b as f64).sqrt() * ladder
        }
        ModelKind::Dicke => {
            let (upper, lower) = if a.n_b == b.n_b + 1 {
                (a, b)
            } else if b.n_b == a.n_b + 1 {
                (b, a)
            } else {
                return 0.0;
            };
            if upper.inner.abs_diff(lower.inner) != 1 {
                return 0.0;
            }
            let j = f64::from(params.size) / 4.0;
            let (m1, m2) = (upper.inner as f64 - j, lower.inner as f64 - j);
            coupling * (upper.n_b as f64).sqrt() * (j * (j + 1.0) - m1 * m2).max(0.0).sqrt()
        }
    }
}

pub fn build_hamiltonian(params: &ModelParams, scaled: bool) -> Result<HamiltonianMatrix> {
    let basis = enumerate_basis(params)?;
    let free: Vec<f64> = basis.states.iter().map(|&s| free_energy(params, s)).collect();
    let coupling = 1.0 / params.size_parameter().sqrt();
    let mut interaction = Vec::new();

    match params.kind {
        ModelKind::Su11 | ModelKind::JaynesCummings => {
            let j = f64::from(params.size) / 4.0;
            for i in 0..basis.len().saturating_sub(1) {
                let s = basis.states[i];
                let radicand = match params.kind {
                    ModelKind::Su11 => {
                        let n = s.inner as f64;
                        (n + 1.0) * (n + 2.0 * params.k.value())
                    }
                    _ => {
                        let m = s.inner as f64 - j;
                        j * (j + 1.0) - m * (m + 1.0)
                    }
                };
                let ladder = checked_sqrt(radicand, i)?;
                interaction.push(Coupling {
                    row: i,
                    col: i + 1,
                    value: coupling * checked_sqrt(s.n_b as f64, i)? * ladder,
                });
            }
        }
        ModelKind::Dicke => {
            let j = f64::from(params.size) / 4.0;
            let twice_j = params.spin()?.twice() as usize;
            for (i, &s) in basis.states.iter().enumerate() {
                if s.n_b >= params.n_trunc {
                    continue;
                }
                let m = s.inner as f64 - j;
                let photon = ((s.n_b + 1) as f64).sqrt();
                let targets = [s.inner.checked_sub(1), (s.inner < twice_j).then_some(s.inner + 1)];
                for inner in targets.into_iter().flatten() {
                    let target = BasisState {
                        n_b: s.n_b + 1,
                        inner,
                    };
                    let Some(col) = basis.position(target) else {
                        continue;
                    };
                    let m2 = inner as f64 - j;
                    let ladder = checked_sqrt(j * (j + 1.0) - m * m2, i)?;
                    interaction.push(Coupling {
                        row: i,
                        col,
                        value: coupling * photon * ladder,
                    });
                }
            }
        }
    }

    Ok(HamiltonianMatrix {
        lambda: params.lambda,
        basis,
        free,
        interaction,
        scaled,
    })
}

fn checked_sqrt(value: f64, state: usize) -> Result<f64> {
    if value < 0.0 {
        return Err(Error::NegativeRadicand { value, state });
    }
    Ok(value.sqrt())
}

/// The conserved charge M as a diagonal matrix on the block basis.
pub fn conserved_charge(params: &ModelParams) -> Result<Array2<f64>> {
    let basis = enumerate_basis(params)?;
    let values: Vec<f64> = match params.kind {
        ModelKind::Su11 => basis
            .states
            .iter()
            .map(|s| 2.0 * (s.n_b + s.inner) as f64)
            .collect(),
        ModelKind::JaynesCummings => basis
            .states
            .iter()
            .map(|s| 2.0 * (s.n_b + s.inner) as f64)
            .collect(),
        ModelKind::Dicke => {
            return Err(Error::Unsupported(
                "the Dicke model does not conserve M; use parity_operator".into(),
            ))
        }
    };
    Ok(Array2::from_diag(&ndarray::Array1::from(values)))
}

/// Parity Π = (−1)^(N_b+m+j) as a diagonal matrix on the Dicke basis.
pub fn parity_operator(params: &ModelParams) -> Result<Array2<f64>> {
    if params.kind != ModelKind::Dicke {
        return Err(Error::Unsupported("parity operator is defined for the Dicke model".into()));
    }
    let basis = enumerate_basis(params)?;
    let values: Vec<f64> = basis
        .states
        .iter()
        .map(|s| f64::from(Parity::of_state(s.n_b, s.inner).sign()))
        .collect();
    Ok(Array2::from_diag(&ndarray::Array1::from(values)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(b: &BasisSet) -> Vec<(usize, f64)> {
        (0..b.len()).map(|i| b.label(i)).collect()
    }

    #[test]
    fn su11_basis() {
        let b = enumerate_basis(&ModelParams::su11(6, 1.0)).unwrap();
        assert_eq!(labels(&b), vec![(3, 0.0), (2, 1.0), (1, 2.0), (0, 3.0)]);
    }

    #[test]
    fn jc_basis() {
        let b = enumerate_basis(&ModelParams::jaynes_cummings(4, 1.0)).unwrap();
        let mut got = labels(&b);
        assert_eq!(got, vec![(2, -1.0), (1, 0.0), (0, 1.0)]);
        got.sort_by_key(|l| l.0);
        assert_eq!(got, vec![(0, 1.0), (1, 0.0), (2, -1.0)]);
        for (n_b, m) in got {
            assert_eq!(n_b as f64, 1.0 - m);
        }
    }

    #[test]
    fn dicke_basis_even_parity() {
        let p = ModelParams::dicke(0.5, 2, 1.0).unwrap();
        assert_eq!(p.parity, Some(Parity::Even));
        let b = enumerate_basis(&p).unwrap();
        assert_eq!(labels(&b), vec![(0, -0.5), (1, 0.5), (2, -0.5)]);
    }

    #[test]
    fn rejects_odd_or_zero_size() {
        assert!(enumerate_basis(&ModelParams::su11(5, 1.0)).is_err());
        assert!(enumerate_basis(&ModelParams::su11(0, 1.0)).is_err());
        assert!(enumerate_basis(&ModelParams::jaynes_cummings(3, 1.0)).is_err());
        // Half-integer spin (size not divisible by 4) is accepted.
        assert_eq!(enumerate_basis(&ModelParams::jaynes_cummings(6, 1.0)).unwrap().len(), 4);
        assert!(ModelParams::su11(4, -1.0).validate().is_err());
        assert!(ModelParams::su11(4, 1.0).with_frequencies(0.0, 1.0).validate().is_err());
        let p = ModelParams::dicke(1.0, 4, 1.0).unwrap().with_n_trunc(0);
        assert!(build_hamiltonian(&p, false).is_err());
    }

    #[test]
    fn su11_two_by_two() {
        let p = ModelParams::su11(2, 1.0);
        let h = build_hamiltonian(&p, false).unwrap().to_dense();
        let expect = [[1.5, 0.5], [0.5, 2.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((h[[i, j]] - expect[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn jc_two_by_two() {
        let p = ModelParams::jaynes_cummings(2, 1.0);
        let h = build_hamiltonian(&p, false).unwrap().to_dense();
        let r = 0.5f64.sqrt();
        let expect = [[1.5, r], [r, 0.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((h[[i, j]] - expect[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_coupling_is_diagonal() {
        let cases = [
            ModelParams::su11(10, 0.0),
            ModelParams::jaynes_cummings(10, 0.0),
            ModelParams::dicke(1.5, 6, 0.0).unwrap(),
        ];
        for p in cases {
            let h = build_hamiltonian(&p, false).unwrap();
            let dense = h.to_dense();
            let b = h.basis();
            for i in 0..h.dim() {
                for j in 0..h.dim() {
                    if i != j {
                        assert_eq!(dense[[i, j]], 0.0);
                    }
                }
                let expect = p.omega0 * b.weight(i) + p.omega * b.states[i].n_b as f64;
                assert!((dense[[i, i]] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn scaled_times_size_equals_unscaled() {
        for p in [
            ModelParams::su11(12, 1.3),
            ModelParams::jaynes_cummings(12, 0.4),
            ModelParams::dicke(2.0, 8, 1.1).unwrap(),
        ] {
            let u = build_hamiltonian(&p, false).unwrap().to_dense();
            let s = build_hamiltonian(&p, true).unwrap().to_dense();
            let m = p.size_parameter();
            for (a, b) in u.iter().zip(s.iter()) {
                assert!((a - b * m).abs() < 1e-12 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn structure_and_symmetry() {
        let p = ModelParams::su11(40, 1.5);
        assert!(build_hamiltonian(&p, false).unwrap().is_tridiagonal());
        let p = ModelParams::jaynes_cummings(40, 1.5);
        assert!(build_hamiltonian(&p, false).unwrap().is_tridiagonal());

        let p = ModelParams::dicke(2.5, 10, 1.5).unwrap();
        let h = build_hamiltonian(&p, false).unwrap();
        let d = h.to_dense();
        for i in 0..h.dim() {
            let off = (0..h.dim()).filter(|&j| j != i && d[[i, j]] != 0.0).count();
            assert!(off <= 4);
            for j in 0..h.dim() {
                assert!((d[[i, j]] - d[[j, i]]).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn block_builder_matches_general_matrix_elements() {
        for p in [
            ModelParams::su11(14, 0.9).with_k(BergmannIndex::ThreeQuarters),
            ModelParams::jaynes_cummings(10, 0.9),
            ModelParams::dicke(1.5, 7, 0.9).unwrap(),
            ModelParams::dicke(1.0, 5, 0.9).unwrap().with_parity(None),
        ] {
            let h = build_hamiltonian(&p, false).unwrap();
            let d = h.to_dense();
            let states = &h.basis().states;
            for (i, &a) in states.iter().enumerate() {
                for (j, &b) in states.iter().enumerate() {
                    if i != j {
                        let expect = p.lambda * interaction_element(&p, a, b);
                        assert!((d[[i, j]] - expect).abs() < 1e-14, "{p:?} {a:?} {b:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn distinct_charge_blocks_do_not_couple() {
        // Both models conserve N_b + inner (inner = n, or m + j at fixed j):
        // take the union of the blocks with N_b + inner = 3 and = 4.
        for kind in [ModelKind::Su11, ModelKind::JaynesCummings] {
            let p = ModelParams::default_for(kind, 8, 1.2, 0).unwrap();
            let union: Vec<BasisState> = [3usize, 4]
                .iter()
                .flat_map(|&total| (0..=total).map(move |inner| BasisState { n_b: total - inner, inner }))
                .collect();
            let mut coupled = 0;
            for &x in &union {
                for &y in &union {
                    let value = interaction_element(&p, x, y);
                    if x.n_b + x.inner != y.n_b + y.inner {
                        assert_eq!(value, 0.0, "{kind:?} {x:?} {y:?}");
                    } else if value != 0.0 {
                        coupled += 1;
                    }
                }
            }
            assert!(coupled > 0);
        }
    }

    #[test]
    fn charge_and_parity() {
        let q = conserved_charge(&ModelParams::su11(6, 1.0)).unwrap();
        assert_eq!(q, Array2::<f64>::eye(4) * 6.0);
        let q = conserved_charge(&ModelParams::jaynes_cummings(4, 1.0)).unwrap();
        assert_eq!(q, Array2::<f64>::eye(3) * 4.0);
        assert!(conserved_charge(&ModelParams::dicke(1.0, 3, 1.0).unwrap()).is_err());

        let p = ModelParams::dicke(2.0, 12, 1.7).unwrap().with_parity(None);
        let h = build_hamiltonian(&p, false).unwrap().to_dense();
        let pi = parity_operator(&p).unwrap();
        let comm = h.dot(&pi) - pi.dot(&h);
        assert!(comm.iter().all(|x| x.abs() <= 1e-12));
    }

    #[test]
    fn zero_coupling_ground_states() {
        // Lowest diagonal entry sits on the expected basis state.
        let lowest = |p: &ModelParams| {
            let h = build_hamiltonian(p, false).unwrap();
            let (i, _) = h
                .free_diagonal()
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .unwrap();
            h.basis().label(i)
        };
        assert_eq!(lowest(&ModelParams::su11(10, 0.0)), (5, 0.0));
        assert_eq!(lowest(&ModelParams::jaynes_cummings(12, 0.0)), (0, 3.0));
        assert_eq!(lowest(&ModelParams::dicke(2.0, 5, 0.0).unwrap()), (0, -2.0));
    }
}
