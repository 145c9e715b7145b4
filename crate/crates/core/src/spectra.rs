//! Exact diagonalization, level dynamics, smoothed level densities and
//! eigenstate expectation values.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{symmetric_eigen, tridiagonal_eigen, Eigen};
use crate::models::{BasisSet, HamiltonianMatrix, ModelKind, ModelParams};

/// Eigenvalues (unscaled, ascending) and optionally eigenvectors of one
/// Hamiltonian block.
///
/// Eigenvectors are normalized with their largest-magnitude component
/// positive so that overlaps between spectra are reproducible.
#[derive(Debug, Clone)]
pub struct Spectrum {
    energies: Vec<f64>,
    vectors: Option<Vec<f64>>,
    basis: BasisSet,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn params(&self) -> &ModelParams {
        &self.basis.params
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn size_parameter(&self) -> f64 {
        self.basis.params.size_parameter()
    }

    /// Unscaled energies E_i.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Scaled energies ℰ_i = E_i / M.
    pub fn scaled_energies(&self) -> Vec<f64> {
        let m = self.size_parameter();
        self.energies.iter().map(|e| e / m).collect()
    }

    pub fn energies_in(&self, scaled: bool) -> Vec<f64> {
        if scaled {
            self.scaled_energies()
        } else {
            self.energies.clone()
        }
    }

    pub fn has_vectors(&self) -> bool {
        self.vectors.is_some()
    }

    /// Eigenvector i in basis order, if eigenvectors were computed.
    pub fn eigenvector(&self, i: usize) -> Option<&[f64]> {
        let n = self.len();
        self.vectors.as_deref().map(|v| &v[i * n..(i + 1) * n])
    }

    fn from_eigen(eigen: Eigen, basis: BasisSet) -> Self {
        let n = eigen.dim();
        let mut vectors = eigen.vectors;
        if let Some(v) = vectors.as_mut() {
            for column in v.chunks_mut(n.max(1)) {
                fix_sign(column);
            }
        }
        Self {
            energies: eigen.values,
            vectors,
            basis,
        }
    }
}

/// Flips `v` so that its largest-magnitude component is positive (the
/// first such component on ties).
pub(crate) fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best * (1.0 + 1e-12) {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn eigen_of(h: &HamiltonianMatrix, want_vectors: bool) -> Result<Eigen> {
    match h.tridiagonal_parts() {
        Some((diag, off)) => tridiagonal_eigen(&diag, &off, want_vectors),
        None => symmetric_eigen(h.dense_unscaled(), h.dim(), want_vectors),
    }
}

/// Full eigendecomposition. SU(1,1) and Jaynes-Cummings blocks are
/// tridiagonal and skip the Householder reduction.
pub fn diagonalize(h: &HamiltonianMatrix) -> Result<Spectrum> {
    Ok(Spectrum::from_eigen(eigen_of(h, true)?, h.basis().clone()))
}

/// Eigenvalues only.
pub fn eigenvalues(h: &HamiltonianMatrix) -> Result<Spectrum> {
    Ok(Spectrum::from_eigen(eigen_of(h, false)?, h.basis().clone()))
}

/// Scaled energies ℰ_i(λ) on a λ grid, aligned by eigenvalue index.
#[derive(Debug, Clone, Serialize)]
pub struct LevelTable {
    pub lambdas: Vec<f64>,
    /// `energies[l][i]`: level i at `lambdas[l]`, unscaled.
    pub energies: Vec<Vec<f64>>,
    pub size: f64,
}

impl LevelTable {
    pub fn scaled(&self, l: usize, i: usize) -> f64 {
        self.energies[l][i] / self.size
    }

    pub fn levels(&self) -> usize {
        self.energies.first().map_or(0, Vec::len)
    }
}

pub fn check_monotone(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid(name, "grid is empty"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(invalid(name, "grid contains non-finite values"));
    }
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = grid.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(invalid(name, "grid must be strictly monotone"));
    }
    Ok(())
}

/// One diagonalization per λ, run in parallel. Failures report the λ at
/// which they occurred.
pub fn level_dynamics(template: &ModelParams, lambdas: &[f64]) -> Result<LevelTable> {
    check_monotone("lambda_grid", lambdas)?;
    if let Some(&bad) = lambdas.iter().find(|&&l| l < 0.0) {
        return Err(invalid("lambda_grid", format!("coupling must be non-negative, got {bad}")));
    }
    let h = crate::models::build_hamiltonian(&template.with_lambda(lambdas[0]), false)?;
    let energies = lambdas
        .par_iter()
        .map(|&lambda| {
            eigen_of(&h.with_lambda(lambda), false)
                .map(|e| e.values)
                .map_err(|source| Error::AtLambda {
                    lambda,
                    source: Box::new(source),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelTable {
        lambdas: lambdas.to_vec(),
        energies,
        size: template.size_parameter(),
    })
}

/// Settings of the adaptive Gaussian kernel estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandwidthRule {
    /// Number of neighbouring distinct levels averaged for the local spacing.
    pub window: usize,
    pub grid_points: usize,
    /// Grid margin beyond the outer levels, in units of their bandwidth.
    pub margin: f64,
}

impl Default for BandwidthRule {
    fn default() -> Self {
        Self {
            window: 11,
            grid_points: 4001,
            margin: 4.0,
        }
    }
}

impl BandwidthRule {
    pub fn describe(&self) -> String {
        format!(
            "gaussian kernel, per-level sigma = mean spacing over {} neighbouring distinct levels",
            self.window
        )
    }
}

pub const MIN_DENSITY_LEVELS: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub kernel_rule: String,
}

impl DensityCurve {
    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    /// Grid point of the maximum within `[lo, hi]`.
    pub fn argmax_within(&self, lo: f64, hi: f64) -> Option<f64> {
        self.grid
            .iter()
            .zip(&self.values)
            .filter(|(x, _)| **x >= lo && **x <= hi)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(x, _)| *x)
    }
}

/// Smooth level density of a spectrum in scaled or unscaled energy.
pub fn smoothed_level_density(spectrum: &Spectrum, rule: &BandwidthRule, scaled: bool) -> Result<DensityCurve> {
    density_of_levels(&spectrum.energies_in(scaled), rule)
}

/// Kernel estimate for an arbitrary ascending list of levels; coincident
/// levels count with their multiplicity.
pub fn density_of_levels(levels: &[f64], rule: &BandwidthRule) -> Result<DensityCurve> {
    if levels.len() < MIN_DENSITY_LEVELS {
        return Err(Error::TooFewLevels {
            needed: MIN_DENSITY_LEVELS,
            got: levels.len(),
        });
    }
    if rule.window < 2 {
        return Err(invalid("density.window", "window must cover at least 2 levels"));
    }
    if rule.grid_points < 2 {
        return Err(invalid("density.grid_points", "need at least 2 grid points"));
    }
    let mut sorted = levels.to_vec();
    sorted.sort_by(f64::total_cmp);
    let span = sorted[sorted.len() - 1] - sorted[0];
    let tol = 1e-12 * span.abs().max(sorted[0].abs()).max(1.0);

    let mut distinct: Vec<(f64, f64)> = Vec::new();
    for &e in &sorted {
        match distinct.last_mut() {
            Some((last, count)) if e - *last <= tol => *count += 1.0,
            _ => distinct.push((e, 1.0)),
        }
    }
    let n = distinct.len();
    if n < 2 {
        return Err(invalid("levels", "all levels coincide; bandwidth undefined"));
    }

    let w = rule.window.min(n);
    let sigma: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(w / 2).min(n - w);
            let hi = lo + w - 1;
            (distinct[hi].0 - distinct[lo].0) / (hi - lo) as f64
        })
        .collect();

    let start = distinct[0].0 - rule.margin * sigma[0];
    let end = distinct[n - 1].0 + rule.margin * sigma[n - 1];
    let step = (end - start) / (rule.grid_points - 1) as f64;
    let grid: Vec<f64> = (0..rule.grid_points).map(|g| start + step * g as f64).collect();

    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let values = grid
        .par_iter()
        .map(|&x| {
            distinct
                .iter()
                .zip(&sigma)
                .map(|(&(e, count), &s)| {
                    let z = (x - e) / s;
                    if z.abs() > 12.0 {
                        0.0
                    } else {
                        count * norm / s * (-0.5 * z * z).exp()
                    }
                })
                .sum()
        })
        .collect();

    Ok(DensityCurve {
        grid,
        values,
        kernel_rule: rule.describe(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Observable {
    /// ⟨N_a⟩/M with N_a = 2n + (4k−1)/2 (SU(1,1) model).
    NaOverM,
    /// ⟨J₀⟩/j (SU(2) models).
    J0OverJ,
}

impl Observable {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Su11 => Observable::NaOverM,
            _ => Observable::J0OverJ,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Observable::NaOverM => "Na_over_M",
            Observable::J0OverJ => "J0_over_j",
        }
    }
}

impl std::str::FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Na_over_M" | "na_over_m" | "Na" => Ok(Observable::NaOverM),
            "J0_over_j" | "j0_over_j" | "J0" | "Jz" => Ok(Observable::J0OverJ),
            other => Err(invalid("expect.observable", format!("unknown observable `{other}`"))),
        }
    }
}

/// (ℰ_i, ⟨O⟩_i) for every eigenstate.
pub fn expectation_values(spectrum: &Spectrum, observable: Observable) -> Result<Vec<(f64, f64)>> {
    let params = spectrum.params();
    let basis = spectrum.basis();
    let values: Vec<f64> = match (observable, params.kind) {
        (Observable::NaOverM, ModelKind::Su11) => {
            let offset = params.k.a_boson_offset();
            let m = params.size_parameter();
            basis
                .states
                .iter()
                .map(|s| (2.0 * s.inner as f64 + offset) / m)
                .collect()
        }
        (Observable::J0OverJ, ModelKind::JaynesCummings | ModelKind::Dicke) => {
            let j = params.size_parameter() / 4.0;
            (0..basis.len()).map(|i| basis.inner_value(i) / j).collect()
        }
        (obs, kind) => {
            return Err(Error::Unsupported(format!(
                "observable {} is not defined for the {} model",
                obs.name(),
                kind.name()
            )))
        }
    };
    if !spectrum.has_vectors() {
        return Err(invalid("spectrum", "expectation values need eigenvectors"));
    }
    let scaled = spectrum.scaled_energies();
    Ok((0..spectrum.len())
        .map(|i| {
            let v = spectrum.eigenvector(i).expect("vectors checked above");
            let o = v.iter().zip(&values).map(|(c, o)| c * c * o).sum();
            (scaled[i], o)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_hamiltonian, Parity};

    #[test]
    fn two_by_two() {
        let h = build_hamiltonian(&ModelParams::su11(2, 1.0), false).unwrap();
        let s = diagonalize(&h).unwrap();
        let r = 0.5f64.sqrt();
        assert!((s.energies()[0] - (2.0 - r)).abs() < 1e-12);
        assert!((s.energies()[1] - (2.0 + r)).abs() < 1e-12);
        assert!((s.scaled_energies()[0] - (2.0 - r) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_coupling_spectrum_is_sorted_diagonal() {
        for p in [ModelParams::su11(6, 0.0), ModelParams::dicke(1.5, 5, 0.0).unwrap()] {
            let h = build_hamiltonian(&p, false).unwrap();
            let mut diag = h.free_diagonal().to_vec();
            diag.sort_by(f64::total_cmp);
            assert_eq!(diagonalize(&h).unwrap().energies(), diag.as_slice());
        }
    }

    #[test]
    fn eigenvector_sign_convention() {
        let h = build_hamiltonian(&ModelParams::dicke(1.0, 6, 1.2).unwrap(), false).unwrap();
        let s = diagonalize(&h).unwrap();
        for i in 0..s.len() {
            let v = s.eigenvector(i).unwrap();
            let big = v.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn level_dynamics_matches_single_diagonalizations() {
        let p = ModelParams::jaynes_cummings(20, 0.0);
        let grid = [0.0, 0.5, 1.0, 1.5];
        let table = level_dynamics(&p, &grid).unwrap();
        for (l, &lambda) in grid.iter().enumerate() {
            let h = build_hamiltonian(&p.with_lambda(lambda), true).unwrap();
            let s = diagonalize(&h).unwrap();
            for (i, e) in s.scaled_energies().iter().enumerate() {
                assert!((table.scaled(l, i) - e).abs() < 1e-12);
            }
        }
        assert!(level_dynamics(&p, &[0.0, 1.0, 0.5]).is_err());
        assert!(level_dynamics(&p, &[]).is_err());
    }

    #[test]
    fn density_of_equally_spaced_levels_is_flat() {
        let levels: Vec<f64> = (0..200).map(|i| 0.1 * i as f64).collect();
        let c = density_of_levels(&levels, &BandwidthRule::default()).unwrap();
        for (x, y) in c.grid.iter().zip(&c.values) {
            if *x > 2.0 && *x < 18.0 {
                assert!((y - 10.0).abs() < 0.5, "{x} {y}");
            }
        }
        assert!((c.integral() - 200.0).abs() < 2.0);
    }

    #[test]
    fn doubling_multiplicity_doubles_density() {
        let levels: Vec<f64> = (0..40).map(|i| (i as f64).powf(1.3)).collect();
        let doubled: Vec<f64> = levels.iter().flat_map(|&e| [e, e]).collect();
        let rule = BandwidthRule::default();
        let a = density_of_levels(&levels, &rule).unwrap();
        let b = density_of_levels(&doubled, &rule).unwrap();
        assert_eq!(a.grid, b.grid);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((2.0 * x - y).abs() <= 1e-12 * y.abs().max(1e-300));
        }
    }

    #[test]
    fn density_needs_enough_levels() {
        let levels: Vec<f64> = (0..19).map(f64::from).collect();
        assert!(matches!(
            density_of_levels(&levels, &BandwidthRule::default()),
            Err(Error::TooFewLevels { needed: 20, got: 19 })
        ));
    }

    #[test]
    fn expectation_values_at_zero_coupling() {
        let p = ModelParams::su11(8, 0.0);
        let s = diagonalize(&build_hamiltonian(&p, false).unwrap()).unwrap();
        for (e, na) in expectation_values(&s, Observable::NaOverM).unwrap() {
            // ℰ = (ω₀(k+n) + ω(4−n))/8 and N_a = 2n for k = 1/4.
            let n = e * 8.0 - 4.5;
            assert!((na - 2.0 * n / 8.0).abs() < 1e-12);
        }
        assert!(expectation_values(&s, Observable::J0OverJ).is_err());

        let p = ModelParams::jaynes_cummings(8, 0.0);
        let s = diagonalize(&build_hamiltonian(&p, false).unwrap()).unwrap();
        let mut got: Vec<f64> = expectation_values(&s, Observable::J0OverJ)
            .unwrap()
            .iter()
            .map(|x| x.1)
            .collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(expectation_values(&s, Observable::NaOverM).is_err());
    }

    #[test]
    fn dicke_parity_doublets_close_with_growing_j() {
        let mut gaps = Vec::new();
        for (j, n_trunc) in [(2.0, 40), (4.0, 50), (8.0, 70)] {
            let even = ModelParams::dicke(j, n_trunc, 1.5).unwrap();
            let odd = even.with_parity(Some(Parity::Odd));
            let e = eigenvalues(&build_hamiltonian(&even, false).unwrap()).unwrap().energies()[0];
            let o = eigenvalues(&build_hamiltonian(&odd, false).unwrap()).unwrap().energies()[0];
            gaps.push((e - o).abs());
        }
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    }
}
