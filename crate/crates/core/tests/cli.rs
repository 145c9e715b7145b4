use std::path::Path;
use std::process::{Command, Output};

fn esqpt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esqpt"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn column(csv: &str, col: usize) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn same_seed_gives_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write(
        dir,
        "run.config",
        "model.kind = dicke\nmodel.j = 1\nmodel.lambda = 1.2\nmodel.n_trunc = 12\n\
         classical.energy_grid = -0.5:0.5:5\nclassical.samples = 20000\n\
         quench.lambda1 = 1.2\nquench.lambda2 = 0.4\nquench.time_grid = 0:20:41\n",
    );
    for cmd in ["classical", "quench", "levels"] {
        for out in ["a", "b"] {
            let o = esqpt(dir, &[cmd, "--config", "run.config", "--out", out, "--seed", "11"]);
            assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        }
        let name = format!("{cmd}.csv");
        assert_eq!(read(&dir.join("a"), &name), read(&dir.join("b"), &name), "{cmd}");
    }
    let o = esqpt(dir, &["classical", "--config", "run.config", "--out", "c", "--seed", "12"]);
    assert!(o.status.success());
    assert_ne!(read(&dir.join("a"), "classical.csv"), read(&dir.join("c"), "classical.csv"));
}

#[test]
fn unknown_key_is_rejected_by_name() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "bad.config", "model.kind = su11\nquench.lamda2 = 1.0\n");
    let o = esqpt(tmp.path(), &["spectrum", "--config", "bad.config"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("quench.lamda2"));

    write(tmp.path(), "bad2.config", "model.size = 7\n");
    let o = esqpt(tmp.path(), &["spectrum", "--config", "bad2.config"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("model.size"));
}

#[test]
fn outputs_and_units() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write(dir, "free.config", "model.kind = su11\nmodel.size = 6\nmodel.lambda = 0\n");
    let o = esqpt(dir, &["spectrum", "--config", "free.config", "--out", "s", "--scaled"]);
    assert!(o.status.success());
    let o = esqpt(dir, &["spectrum", "--config", "free.config", "--out", "u", "--unscaled"]);
    assert!(o.status.success());
    let scaled = read(&dir.join("s"), "spectrum.csv");
    let unscaled = read(&dir.join("u"), "spectrum.csv");
    assert!(scaled.starts_with("index,energy_scaled [E/M"));
    assert!(unscaled.starts_with("index,energy [units of omega]"));
    assert!(!scaled.contains('\r'));
    // At λ = 0 the levels are the sorted free diagonal.
    let h = esqpt::models::build_hamiltonian(&esqpt::models::ModelParams::su11(6, 0.0), false).unwrap();
    let mut free = h.free_diagonal().to_vec();
    free.sort_by(f64::total_cmp);
    assert_eq!(column(&unscaled, 1), free);
    let scaled_free: Vec<f64> = free.iter().map(|e| e / 6.0).collect();
    assert_eq!(column(&scaled, 1), scaled_free);
    assert_eq!(unscaled.lines().nth(1).unwrap(), format!("0,{:.16e}", free[0]));

    let meta: serde_json::Value = serde_json::from_str(&read(&dir.join("s"), "spectrum.meta.json")).unwrap();
    assert_eq!(meta["library_version"], env!("CARGO_PKG_VERSION"));
    assert!(meta["timing"]["wall_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(meta["parameters"]["model.size"], "6");
    let resolved = read(&dir.join("s"), "resolved.config");
    assert!(resolved.contains("model.lambda = 0.0\n"));
    let o = esqpt(dir, &["spectrum", "--config", "s/resolved.config", "--out", "r"]);
    assert!(o.status.success());
    assert_eq!(read(&dir.join("r"), "spectrum.csv"), scaled);
}

#[test]
fn trivial_quench_survives() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write(
        dir,
        "q.config",
        "model.kind = jc\nmodel.size = 20\nquench.lambda1 = 0.8\nquench.lambda2 = 0.8\nquench.time_grid = 0:50:26\n",
    );
    let o = esqpt(dir, &["quench", "--config", "q.config", "--out", "o"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let p = column(&read(&dir.join("o"), "quench.csv"), 1);
    assert_eq!(p.len(), 26);
    assert!(p.iter().all(|p| (p - 1.0).abs() < 1e-12), "{p:?}");
    let w = column(&read(&dir.join("o"), "quench_distribution.csv"), 3);
    assert!((w[0] - 1.0).abs() < 1e-12);
}

#[test]
fn converge_reports_failure_with_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write(
        dir,
        "c.config",
        "model.kind = dicke\nmodel.j = 2\nmodel.lambda = 1.5\nconverge.n_trunc_schedule = 4,6,8\nconverge.tol = 1e-10\n",
    );
    let o = esqpt(dir, &["converge", "--config", "c.config", "--out", "o"]);
    assert_eq!(o.status.code(), Some(3));
    let csv = read(&dir.join("o"), "converge.csv");
    assert_eq!(csv.lines().count(), 3);
    let meta: serde_json::Value = serde_json::from_str(&read(&dir.join("o"), "converge.meta.json")).unwrap();
    assert!(meta["results"]["chosen_n_trunc"].is_null());

    write(
        dir,
        "ok.config",
        "model.kind = dicke\nmodel.j = 2\nmodel.lambda = 0\nconverge.n_trunc_schedule = 4,6,8\n",
    );
    let o = esqpt(dir, &["converge", "--config", "ok.config", "--out", "p"]);
    assert!(o.status.success());
    let meta: serde_json::Value = serde_json::from_str(&read(&dir.join("p"), "converge.meta.json")).unwrap();
    assert_eq!(meta["results"]["chosen_n_trunc"], 4);
}
