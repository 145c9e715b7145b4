//! Sudden quenches λ₁ → λ₂: overlaps of the initial eigenstate with the
//! post-quench eigenbasis, survival probability, energy distributions, and
//! the critical quench that centers the post-quench energy on ℰ_c.

use rayon::prelude::*;
use serde::Serialize;

use crate::classical::{critical_energy, ClassicalModel};
use crate::error::{invalid, Error, Result};
use crate::linalg::lanczos_lowest;
use crate::models::{build_hamiltonian, HamiltonianMatrix, ModelParams};
use crate::spectra::{diagonalize, fix_sign, DensityCurve, Spectrum};

/// Whether times are measured against the scaled Hamiltonian H/M or the
/// unscaled one. Scaled time t corresponds to unscaled time M·t.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeConvention {
    Scaled,
    Unscaled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuenchSetup {
    pub params1: ModelParams,
    pub lambda2: f64,
    pub initial_index: usize,
    pub time_grid: Vec<f64>,
    pub time: TimeConvention,
}

impl QuenchSetup {
    pub fn new(params1: ModelParams, lambda2: f64) -> Self {
        Self {
            params1,
            lambda2,
            initial_index: 0,
            time_grid: Vec::new(),
            time: TimeConvention::Scaled,
        }
    }

    pub fn with_times(mut self, times: Vec<f64>, time: TimeConvention) -> Self {
        self.time_grid = times;
        self.time = time;
        self
    }

    pub fn with_initial_index(mut self, index: usize) -> Self {
        self.initial_index = index;
        self
    }

    pub fn delta(&self) -> f64 {
        self.lambda2 - self.params1.lambda
    }

    pub fn params2(&self) -> ModelParams {
        self.params1.with_lambda(self.lambda2)
    }

    pub fn validate(&self) -> Result<()> {
        self.params1.validate()?;
        self.params2().validate()?;
        if self.time_grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(invalid("quench.time_grid", "times must be finite and non-negative"));
        }
        if self.time_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("quench.time_grid", "times must be ascending"));
        }
        Ok(())
    }
}

/// Sum of squared overlaps below which a truncated quench is flagged.
pub const COMPLETENESS_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct QuenchResult {
    pub setup: QuenchSetup,
    /// c_i = ⟨ψ_{2i}|ψ₁⟩.
    pub overlaps: Vec<f64>,
    /// Unscaled post-quench energies E_{2i}.
    pub energies2: Vec<f64>,
    pub size: f64,
    /// Scaled pre-quench energy ℰ₁.
    pub initial_energy: f64,
    /// Hellmann-Feynman slope ℰ′₁ (scaled).
    pub slope: f64,
    /// Scaled mean post-quench energy Ē₂ = ℰ₁ + Δℰ′₁.
    pub mean_energy: f64,
    pub survival: Vec<f64>,
    pub completeness: f64,
    pub converged: bool,
}

impl QuenchResult {
    pub fn scaled_energies2(&self) -> Vec<f64> {
        self.energies2.iter().map(|e| e / self.size).collect()
    }

    /// (E_{2i}, |c_i|²) pairs in scaled or unscaled energy.
    pub fn discrete_distribution(&self, scaled: bool) -> Vec<(f64, f64)> {
        let s = if scaled { 1.0 / self.size } else { 1.0 };
        self.energies2
            .iter()
            .zip(&self.overlaps)
            .map(|(e, c)| (e * s, c * c))
            .collect()
    }

    /// Σ c_i² ℰ_{2i}, which must agree with `mean_energy`.
    pub fn weighted_energy(&self) -> f64 {
        self.overlaps
            .iter()
            .zip(&self.energies2)
            .map(|(c, e)| c * c * e)
            .sum::<f64>()
            / self.size
    }

    /// Long-time average of the survival probability, Σ c_i⁴.
    pub fn inverse_participation(&self) -> f64 {
        self.overlaps.iter().map(|c| c.powi(4)).sum()
    }
}

/// c_i = (eigenvector i of H₂)ᵀ · (eigenvector `initial_index` of H₁).
pub fn quench_overlaps(spectrum1: &Spectrum, initial_index: usize, spectrum2: &Spectrum) -> Result<Vec<f64>> {
    if spectrum1.basis().states != spectrum2.basis().states {
        return Err(Error::BasisMismatch(format!(
            "dimensions {} and {}",
            spectrum1.len(),
            spectrum2.len()
        )));
    }
    let psi = spectrum1
        .eigenvector(initial_index)
        .ok_or_else(|| invalid("quench.initial_index", format!("{initial_index} out of range or no eigenvectors")))?;
    overlaps_with(psi, spectrum2)
}

fn overlaps_with(psi: &[f64], spectrum2: &Spectrum) -> Result<Vec<f64>> {
    if psi.len() != spectrum2.len() || !spectrum2.has_vectors() {
        return Err(Error::BasisMismatch(format!(
            "state of length {} against a spectrum of dimension {}",
            psi.len(),
            spectrum2.len()
        )));
    }
    Ok((0..spectrum2.len())
        .into_par_iter()
        .map(|i| {
            let v = spectrum2.eigenvector(i).expect("checked above");
            v.iter().zip(psi).map(|(a, b)| a * b).sum()
        })
        .collect())
}

/// p(t) = |Σ c_i² e^{−i E_i t}|² with energies in the units matching the
/// time convention.
pub fn survival_probability(overlaps: &[f64], energies: &[f64], times: &[f64]) -> Vec<f64> {
    let weights: Vec<(f64, f64)> = overlaps
        .iter()
        .zip(energies)
        .map(|(c, e)| (c * c, *e))
        .filter(|(w, _)| *w > 0.0)
        .collect();
    times
        .par_iter()
        .map(|&t| {
            let (mut re, mut im) = (0.0, 0.0);
            for &(w, e) in &weights {
                let (s, c) = (e * t).sin_cos();
                re += w * c;
                im -= w * s;
            }
            (re * re + im * im).min(1.0)
        })
        .collect()
}

/// Energy of `spectrum` in the units of a time convention.
fn energies_for(energies: &[f64], size: f64, time: TimeConvention) -> Vec<f64> {
    match time {
        TimeConvention::Scaled => energies.iter().map(|e| e / size).collect(),
        TimeConvention::Unscaled => energies.to_vec(),
    }
}

/// Scaled ⟨ψ|ℋ′|ψ⟩ for the interaction at unit λ.
pub fn interaction_slope(h: &HamiltonianMatrix, psi: &[f64]) -> f64 {
    h.interaction_expectation(psi) / h.size_parameter()
}

/// (Ē₂, ℰ′₁) in scaled units for a quench of size `delta` out of
/// eigenstate `initial_index` of `spectrum1`, whose Hamiltonian is `h1`.
pub fn mean_energy_and_slope(h1: &HamiltonianMatrix, spectrum1: &Spectrum, initial_index: usize, delta: f64) -> Result<(f64, f64)> {
    let psi = spectrum1
        .eigenvector(initial_index)
        .ok_or_else(|| invalid("quench.initial_index", format!("{initial_index} out of range or no eigenvectors")))?;
    let slope = interaction_slope(h1, psi);
    let e1 = spectrum1.energies()[initial_index] / spectrum1.size_parameter();
    Ok((e1 + delta * slope, slope))
}

pub fn run_quench(setup: &QuenchSetup) -> Result<QuenchResult> {
    setup.validate()?;
    let h1 = build_hamiltonian(&setup.params1, false)?;
    let h2 = h1.with_lambda(setup.lambda2);
    let s1 = diagonalize(&h1)?;
    let s2 = diagonalize(&h2)?;
    let index = setup.initial_index;
    if index >= s1.len() {
        return Err(invalid("quench.initial_index", format!("{index} exceeds dimension {}", s1.len())));
    }
    let overlaps = quench_overlaps(&s1, index, &s2)?;
    let (mean_energy, slope) = mean_energy_and_slope(&h1, &s1, index, setup.delta())?;
    let size = h1.size_parameter();
    let survival = survival_probability(&overlaps, &energies_for(s2.energies(), size, setup.time), &setup.time_grid);
    let completeness: f64 = overlaps.iter().map(|c| c * c).sum();
    let converged = (completeness - 1.0).abs() <= COMPLETENESS_TOLERANCE;
    if !converged {
        log::warn!("overlap completeness {completeness} deviates from 1; quench flagged non-converged");
    }
    Ok(QuenchResult {
        setup: setup.clone(),
        overlaps,
        energies2: s2.energies().to_vec(),
        size,
        initial_energy: s1.energies()[index] / size,
        slope,
        mean_energy,
        survival,
        completeness,
        converged,
    })
}

/// Per-level Gaussian widths σ_i = ℰ_{i+1} − ℰ_i; the last level reuses the
/// previous spacing and zero spacings borrow the nearest nonzero one.
fn level_spacings(energies: &[f64]) -> Result<Vec<f64>> {
    let n = energies.len();
    if n < 2 {
        return Err(Error::TooFewLevels { needed: 2, got: n });
    }
    let mut sigma: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
    sigma.push(sigma[n - 2]);
    let scale = energies.iter().fold(0.0f64, |a, e| a.max(e.abs())).max(1.0);
    let zero = |s: f64| s <= 1e-14 * scale;
    if sigma.iter().all(|&s| zero(s)) {
        return Err(invalid("energies", "all levels coincide"));
    }
    let fixed: Vec<f64> = (0..n)
        .map(|i| {
            if !zero(sigma[i]) {
                return sigma[i];
            }
            let nearest = (1..n)
                .flat_map(|d| [i.checked_sub(d), Some(i + d).filter(|&k| k < n)])
                .flatten()
                .find(|&k| !zero(sigma[k]))
                .expect("a nonzero spacing exists");
            log::warn!("coincident levels at index {i}; using the spacing of level {nearest}");
            sigma[nearest]
        })
        .collect();
    Ok(fixed)
}

/// ω̄(ℰ) = Σ c_i² G(ℰ; ℰ_i, σ_i) on a uniform grid covering all levels with
/// non-negligible weight.
pub fn smoothed_energy_distribution(overlaps: &[f64], energies: &[f64], grid_points: usize) -> Result<DensityCurve> {
    if overlaps.len() != energies.len() {
        return Err(invalid("overlaps", "overlaps and energies differ in length"));
    }
    if grid_points < 2 {
        return Err(invalid("quench.grid_points", "need at least 2 grid points"));
    }
    let sigma = level_spacings(energies)?;
    let weights: Vec<f64> = overlaps.iter().map(|c| c * c).collect();
    let max_w = weights.iter().fold(0.0f64, |a, &w| a.max(w));
    let relevant: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 1e-14 * max_w).collect();
    let (first, last) = (relevant[0], relevant[relevant.len() - 1]);
    let start = energies[first] - 4.0 * sigma[first];
    let end = energies[last] + 4.0 * sigma[last];
    let step = (end - start) / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points).map(|g| start + step * g as f64).collect();
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let values = grid
        .par_iter()
        .map(|&x| {
            relevant
                .iter()
                .map(|&i| {
                    let z = (x - energies[i]) / sigma[i];
                    if z.abs() > 12.0 {
                        0.0
                    } else {
                        weights[i] * norm / sigma[i] * (-0.5 * z * z).exp()
                    }
                })
                .sum()
        })
        .collect();
    Ok(DensityCurve {
        grid,
        values,
        kernel_rule: "gaussian per level, sigma = spacing to the next level".into(),
    })
}

/// Centered moving average over `window` grid points (odd); the output
/// grid drops the (window−1)/2 points at each end.
pub fn extra_smooth(curve: &DensityCurve, window: usize) -> Result<DensityCurve> {
    if window % 2 == 0 {
        return Err(Error::Window(format!("window must be odd, got {window}")));
    }
    let n = curve.values.len();
    if window > n {
        return Err(Error::Window(format!("window {window} exceeds grid of {n} points")));
    }
    let half = window / 2;
    let values = curve
        .values
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect();
    Ok(DensityCurve {
        grid: curve.grid[half..n - half].to_vec(),
        values,
        kernel_rule: format!("{}; moving average over {window} points", curve.kernel_rule),
    })
}

/// Maximum of the survival probability over `observation`, which must lie
/// after the `decay` window.
pub fn recurrence_metric(times: &[f64], survival: &[f64], decay: (f64, f64), observation: (f64, f64)) -> Result<f64> {
    if times.len() != survival.len() {
        return Err(Error::Window("times and survival differ in length".into()));
    }
    if !(decay.0 <= decay.1 && observation.0 <= observation.1) {
        return Err(Error::Window("window bounds must be ordered".into()));
    }
    if observation.0 < decay.1 {
        return Err(Error::Window("observation window must start after the initial decay".into()));
    }
    let inside = |w: (f64, f64)| times.iter().filter(move |t| **t >= w.0 && **t <= w.1).count();
    if inside(decay) == 0 || inside(observation) == 0 {
        return Err(Error::Window("empty window".into()));
    }
    Ok(times
        .iter()
        .zip(survival)
        .filter(|(t, _)| **t >= observation.0 && **t <= observation.1)
        .map(|(_, p)| *p)
        .fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalQuench {
    pub lambda1: f64,
    pub delta_c: f64,
    pub lambda2: f64,
    /// Scaled ℰ₁ and ℰ′₁ of the initial state.
    pub energy1: f64,
    pub slope: f64,
    pub energy_c: f64,
    /// Ē₂ = ℰ₁ + Δ_c ℰ′₁.
    pub mean_energy2: f64,
    /// True when ℰ₁ ≥ ℰ_c and Δ_c = 0 was returned.
    pub at_boundary: bool,
}

/// Blocks above this dimension get their ground state from Lanczos.
pub const LANCZOS_DIMENSION: usize = 2500;

/// Eigenpair `index` of `h`: scaled energy and eigenvector.
pub fn eigenpair(h: &HamiltonianMatrix, index: usize) -> Result<(f64, Vec<f64>)> {
    let size = h.size_parameter();
    if index == 0 && h.dim() > LANCZOS_DIMENSION && !h.is_tridiagonal() {
        let (e, mut v) = lanczos_lowest(h.dim(), |x, y| h.apply_unscaled(x, y), 1e-12, 1500)?;
        fix_sign(&mut v);
        return Ok((e / size, v));
    }
    let s = diagonalize(h)?;
    let v = s
        .eigenvector(index)
        .ok_or_else(|| invalid("quench.initial_index", format!("{index} exceeds dimension {}", s.len())))?;
    Ok((s.energies()[index] / size, v.to_vec()))
}

/// Δ_c = (ℰ_c − ℰ₁)/ℰ′₁ with the λ-independent critical energy of the model.
pub fn critical_quench(params1: &ModelParams, initial_index: usize) -> Result<CriticalQuench> {
    let h1 = build_hamiltonian(params1, false)?;
    let (e1, psi) = eigenpair(&h1, initial_index)?;
    let slope = interaction_slope(&h1, &psi);
    let ec = critical_energy(&ClassicalModel::from_params(params1));
    critical_quench_from(params1.lambda, e1, slope, ec)
}

/// Closed-form critical quench from ℰ₁, ℰ′₁ and a constant ℰ_c.
pub fn critical_quench_from(lambda1: f64, e1: f64, slope: f64, ec: f64) -> Result<CriticalQuench> {
    if e1 >= ec {
        return Ok(CriticalQuench {
            lambda1,
            delta_c: 0.0,
            lambda2: lambda1,
            energy1: e1,
            slope,
            energy_c: ec,
            mean_energy2: e1,
            at_boundary: true,
        });
    }
    if slope == 0.0 {
        return Err(Error::CriticalQuench("the slope ℰ′₁ vanishes; the energy cannot reach ℰ_c".into()));
    }
    let delta_c = (ec - e1) / slope;
    let lambda2 = lambda1 + delta_c;
    if lambda2 < 0.0 {
        return Err(Error::CriticalQuench(format!("required λ₂ = {lambda2} is negative")));
    }
    Ok(CriticalQuench {
        lambda1,
        delta_c,
        lambda2,
        energy1: e1,
        slope,
        energy_c: ec,
        mean_energy2: e1 + delta_c * slope,
        at_boundary: false,
    })
}

/// Solves ℰ₁ + Δℰ′₁ = ℰ_c(λ₁ + Δ) for a λ-dependent critical line by
/// bracketing and bisection. `max_delta` bounds |Δ|.
pub fn critical_quench_general(lambda1: f64, e1: f64, slope: f64, ec: impl Fn(f64) -> f64, max_delta: f64) -> Result<f64> {
    let f = |d: f64| e1 + d * slope - ec(lambda1 + d);
    let f0 = f(0.0);
    if f0 == 0.0 {
        return Ok(0.0);
    }
    if slope == 0.0 && ec(lambda1 + max_delta) == ec(lambda1) && ec(lambda1 - max_delta) == ec(lambda1) {
        return Err(Error::CriticalQuench("the slope ℰ′₁ vanishes and ℰ_c is flat".into()));
    }
    // Expand outward in both directions until the sign changes.
    let mut step = 1e-3 * max_delta.max(1e-12);
    while step <= max_delta {
        for d in [step, -step] {
            if lambda1 + d < 0.0 {
                continue;
            }
            if f(d).signum() != f0.signum() {
                let (mut lo, mut hi) = (0.0f64.min(d), 0.0f64.max(d));
                let flo = f(lo);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if f(mid).signum() == flo.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Ok(0.5 * (lo + hi));
            }
        }
        step *= 2.0;
    }
    Err(Error::CriticalQuench(format!("no crossing with the critical line within |Δ| ≤ {max_delta}")))
}
