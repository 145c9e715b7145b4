use esqpt::cli::truncation_convergence;
use esqpt::models::ModelParams;

/// Dense diagonalization of two blocks of dimension ≈ 9000; run with
/// `cargo test --release -- --ignored`.
#[test]
#[ignore]
fn dicke_j40_cutoff_220_passes_low_energy_window() {
    let p = ModelParams::dicke(40.0, 220, 1.02).unwrap();
    let r = truncation_convergence(&p, &[220, 240], None, -30.0, 1e-6).unwrap();
    assert_eq!(r.chosen, Some(220), "{:?}", r.drifts());
}
