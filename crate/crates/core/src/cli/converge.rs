//! Boson-truncation convergence of Dicke spectra.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::models::{build_hamiltonian, ModelKind, ModelParams};
use crate::spectra::eigenvalues;

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStep {
    pub n_trunc: usize,
    pub dim: usize,
    /// Levels of this truncation inside the energy window.
    pub levels_in_window: usize,
    /// max |E_i(n_trunc) − E_i(next n_trunc)| over the window levels;
    /// absent for the last cutoff.
    pub drift: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub steps: Vec<ConvergenceStep>,
    /// Unscaled window; `None` as lower end means from the ground state.
    pub energy_min: Option<f64>,
    pub energy_max: f64,
    pub tol: f64,
    /// Smallest cutoff whose drift to the next one is within `tol`.
    pub chosen: Option<usize>,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.chosen.is_some()
    }

    pub fn drifts(&self) -> Vec<f64> {
        self.steps.iter().filter_map(|s| s.drift).collect()
    }
}

/// Diagonalizes `template` at every cutoff of `schedule` and compares
/// consecutive cutoffs level by level inside the unscaled energy window.
pub fn truncation_convergence(
    template: &ModelParams,
    schedule: &[usize],
    energy_min: Option<f64>,
    energy_max: f64,
    tol: f64,
) -> Result<ConvergenceReport> {
    if template.kind != ModelKind::Dicke {
        return Err(invalid("model.kind", "truncation convergence applies to the Dicke model"));
    }
    if schedule.len() < 2 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid(
            "converge.n_trunc_schedule",
            "need at least two strictly increasing cutoffs",
        ));
    }
    if !(tol > 0.0) {
        return Err(invalid("converge.tol", "must be positive"));
    }
    let spectra = schedule
        .par_iter()
        .map(|&n| {
            let h = build_hamiltonian(&template.with_n_trunc(n), false)?;
            Ok(eigenvalues(&h)?.energies().to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    let lo = energy_min.unwrap_or(f64::NEG_INFINITY);
    let steps: Vec<ConvergenceStep> = spectra
        .iter()
        .enumerate()
        .map(|(k, levels)| {
            let window: Vec<usize> = (0..levels.len())
                .filter(|&i| levels[i] >= lo && levels[i] <= energy_max)
                .collect();
            let drift = spectra.get(k + 1).map(|next| {
                window
                    .iter()
                    .map(|&i| (levels[i] - next[i]).abs())
                    .fold(0.0, f64::max)
            });
            ConvergenceStep {
                n_trunc: schedule[k],
                dim: levels.len(),
                levels_in_window: window.len(),
                drift,
            }
        })
        .collect();
    let chosen = steps
        .iter()
        .find(|s| s.drift.is_some_and(|d| d <= tol))
        .map(|s| s.n_trunc);
    Ok(ConvergenceReport {
        steps,
        energy_min,
        energy_max,
        tol,
        chosen,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_levels_do_not_drift() {
        let p = ModelParams::dicke(2.0, 10, 0.0).unwrap();
        let r = truncation_convergence(&p, &[6, 8, 10], None, 0.0, 1e-12).unwrap();
        assert_eq!(r.drifts(), vec![0.0, 0.0]);
        assert_eq!(r.chosen, Some(6));
    }

    #[test]
    fn drift_shrinks_with_cutoff() {
        let p = ModelParams::dicke(2.0, 10, 1.5).unwrap();
        let r = truncation_convergence(&p, &[10, 15, 20, 25, 30], None, 0.0, 1e-8).unwrap();
        let d = r.drifts();
        assert!(d.windows(2).all(|w| w[1] <= w[0]), "{d:?}");
        assert!(r.steps[0].levels_in_window > 0);
    }

    #[test]
    fn rejects_other_models() {
        let p = ModelParams::su11(10, 1.0);
        assert!(truncation_convergence(&p, &[1, 2], None, 0.0, 1e-6).is_err());
    }
}
