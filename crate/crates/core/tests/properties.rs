use proptest::prelude::*;

use esqpt::algebra::{su11_generators, su2_generators};
use esqpt::classical::{critical_energy, order_parameter, semiclassical_density, ClassicalModel, MonteCarloOptions};
use esqpt::models::{build_hamiltonian, ModelKind, ModelParams};
use esqpt::quench::{quench_overlaps, survival_probability};
use esqpt::spectra::{diagonalize, eigenvalues, smoothed_level_density, BandwidthRule};

fn params(kind: u8, half: u32, lambda: f64) -> ModelParams {
    match kind {
        0 => ModelParams::su11(2 * half, lambda),
        1 => ModelParams::jaynes_cummings(2 * half, lambda),
        _ => ModelParams::dicke(f64::from(half.min(6)) / 2.0, 8, lambda).unwrap(),
    }
}

fn commutator(a: &ndarray::Array2<f64>, b: &ndarray::Array2<f64>) -> ndarray::Array2<f64> {
    a.dot(b) - b.dot(a)
}

fn max_abs(a: &ndarray::Array2<f64>, rows: usize) -> f64 {
    a.slice(ndarray::s![..rows, ..rows]).iter().fold(0.0, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn su2_algebra_closes(twice_j in 1u32..40) {
        let g = su2_generators(f64::from(twice_j) / 2.0).unwrap();
        let d = g.dim();
        prop_assert!(max_abs(&(commutator(&g.weight, &g.raising) - &g.raising), d) < 1e-12);
        prop_assert!(max_abs(&(commutator(&g.raising, &g.lowering) - &g.weight * 2.0), d) < 1e-12);
        prop_assert_eq!(&g.lowering, &g.raising.t().to_owned());
    }

    #[test]
    fn su11_algebra_closes_on_interior(odd in any::<bool>(), n_max in 2usize..30) {
        let k = if odd { 0.75 } else { 0.25 };
        let g = su11_generators(k, n_max).unwrap();
        let interior = g.dim() - 1;
        prop_assert!(max_abs(&(commutator(&g.weight, &g.raising) - &g.raising), interior) < 1e-12);
        prop_assert!(max_abs(&(commutator(&g.raising, &g.lowering) + &g.weight * 2.0), interior) < 1e-12);
        let casimir = g.casimir() - ndarray::Array2::<f64>::eye(g.dim()) * (-k * (k - 1.0));
        prop_assert!(max_abs(&casimir, interior) < 1e-12);
    }

    #[test]
    fn eigendecomposition_is_exact(kind in 0u8..3, half in 1u32..20, lambda in 0.0f64..3.0) {
        let p = params(kind, half, lambda);
        let h = build_hamiltonian(&p, false).unwrap();
        let dense = h.to_dense();
        let n = h.dim();
        prop_assert!((&dense - &dense.t()).iter().all(|x| x.abs() <= 1e-14));
        let s = diagonalize(&h).unwrap();
        let scale = s.energies().iter().fold(1.0f64, |m, e| m.max(e.abs()));
        for i in 0..n {
            let v = ndarray::ArrayView1::from(s.eigenvector(i).unwrap());
            let residual = &dense.dot(&v) - &(&v * s.energies()[i]);
            prop_assert!(residual.iter().all(|x| x.abs() <= 1e-10 * scale));
            for j in 0..=i {
                let w = ndarray::ArrayView1::from(s.eigenvector(j).unwrap());
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((v.dot(&w) - expected).abs() < 1e-10);
            }
        }
        let trace: f64 = s.energies().iter().sum();
        prop_assert!((trace - h.trace_unscaled()).abs() <= 1e-10 * scale * n as f64);
        prop_assert!(s.energies().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn survival_stays_in_unit_interval(kind in 0u8..3, half in 1u32..12, l1 in 0.0f64..2.5, l2 in 0.0f64..2.5) {
        let p = params(kind, half, l1);
        let h1 = build_hamiltonian(&p, false).unwrap();
        let s1 = diagonalize(&h1).unwrap();
        let s2 = diagonalize(&h1.with_lambda(l2)).unwrap();
        let c = quench_overlaps(&s1, 0, &s2).unwrap();
        let times: Vec<f64> = (0..50).map(|t| 0.37 * t as f64).collect();
        let p1 = survival_probability(&c, s2.energies(), &times);
        prop_assert!((p1[0] - 1.0).abs() < 1e-10);
        prop_assert!(p1.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn order_parameter_is_positive_above_half(g in 0.5001f64..3.0) {
        let m = ClassicalModel::standard(ModelKind::Su11, 1.0);
        prop_assert!(order_parameter(&m, g).unwrap() > 0.0);
    }
}

#[test]
fn order_parameter_is_continuous_at_half() {
    let m = ClassicalModel::standard(ModelKind::JaynesCummings, 1.0);
    assert_eq!(order_parameter(&m, 0.5).unwrap(), 0.0);
    assert!(order_parameter(&m, 0.5 + 1e-9).unwrap() < 1e-7);
}

#[test]
fn long_time_average_equals_inverse_participation() {
    let p = ModelParams::su11(40, 1.5);
    let h1 = build_hamiltonian(&p, false).unwrap();
    let s1 = diagonalize(&h1).unwrap();
    let s2 = diagonalize(&h1.with_lambda(0.6)).unwrap();
    let c = quench_overlaps(&s1, 0, &s2).unwrap();
    let ipr: f64 = c.iter().map(|c| c.powi(4)).sum();
    let times: Vec<f64> = (0..400_000).map(|t| 0.05 * t as f64).collect();
    let p1 = survival_probability(&c, s2.energies(), &times);
    let mean = p1.iter().sum::<f64>() / p1.len() as f64;
    assert!((mean - ipr).abs() < 1e-3, "mean {mean} vs {ipr}");
}

#[test]
fn semiclassical_density_matches_quantum_away_from_critical_energy() {
    let mc = MonteCarloOptions::default();
    for (kind, points) in [
        (ModelKind::Su11, [0.40, 0.43, 0.60, 0.70]),
        (ModelKind::JaynesCummings, [0.15, 0.18, 0.35, 0.45]),
    ] {
        let p = match kind {
            ModelKind::Su11 => ModelParams::su11(2000, 1.5),
            _ => ModelParams::jaynes_cummings(2000, 1.5),
        };
        let classical = ClassicalModel::from_params(&p);
        let ec = critical_energy(&classical);
        let s = eigenvalues(&build_hamiltonian(&p, false).unwrap()).unwrap();
        let curve = smoothed_level_density(&s, &BandwidthRule::default(), true).unwrap();
        for e in points {
            assert!((e - ec).abs() > 0.05);
            let g = curve.grid.partition_point(|x| *x < e);
            let quantum = curve.values[g];
            let semi = semiclassical_density(&classical, e, p.size_parameter(), &mc).unwrap().value;
            let rel = (semi - quantum).abs() / quantum;
            assert!(rel < 0.1, "{} at {e}: semiclassical {semi}, quantum {quantum}", kind.name());
        }
    }
}
