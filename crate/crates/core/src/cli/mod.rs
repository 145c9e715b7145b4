//! Command-line front end: configuration, commands and output files.
//!
//! Every command writes `<command>.csv`, `<command>.meta.json` and
//! `resolved.config` into the output directory. CSV numbers use `{:.16e}`;
//! timing lives only in the JSON sidecar so CSV output is reproducible.

pub mod config;
pub mod converge;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

use crate::classical::{
    critical_data, minimize_potential, order_parameter, phase_space_volume, ClassicalModel,
};
use crate::models::build_hamiltonian;
use crate::quench::{
    critical_quench, extra_smooth, recurrence_metric, run_quench, smoothed_energy_distribution,
    QuenchResult, QuenchSetup, TimeConvention,
};
use crate::spectra::{diagonalize, eigenvalues, expectation_values, level_dynamics, smoothed_level_density};
pub use config::{ConfigError, Grid, RunConfig};
pub use converge::{truncation_convergence, ConvergenceReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Spectrum,
    Levels,
    Density,
    Expect,
    Classical,
    Quench,
    CriticalQuench,
    Converge,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Levels => "levels",
            Command::Density => "density",
            Command::Expect => "expect",
            Command::Classical => "classical",
            Command::Quench => "quench",
            Command::CriticalQuench => "critical-quench",
            Command::Converge => "converge",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "esqpt", version, about = "Spectra, classical limits and quenches of SU(1,1), Jaynes-Cummings and Dicke models")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Run configuration (`section.key = value` lines).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report energies as E/M.
    #[arg(long, conflicts_with = "unscaled")]
    pub scaled: bool,
    /// Report energies as E.
    #[arg(long)]
    pub unscaled: bool,
    /// Seed for Monte Carlo estimates; overrides `run.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Numeric(#[from] crate::Error),
    #[error("truncation not converged within tolerance {tol:e} for any cutoff of the schedule")]
    NotConverged { tol: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::NotConverged { .. } => 3,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads the config file (if any) and applies command-line overrides.
pub fn resolve_config(args: &Args) -> Result<RunConfig, CliError> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(io_err(path))?,
        None => String::new(),
    };
    let mut config = RunConfig::from_text(&text)?;
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    if args.scaled {
        config.scaled = true;
    }
    if args.unscaled {
        config.scaled = false;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn energy_header(scaled: bool) -> &'static str {
    if scaled {
        "energy_scaled [E/M in units of omega]"
    } else {
        "energy [units of omega]"
    }
}

fn density_header(scaled: bool) -> &'static str {
    if scaled {
        "density [levels per unit E/M]"
    } else {
        "density [levels per unit E]"
    }
}

fn time_header(scaled: bool) -> &'static str {
    if scaled {
        "time_scaled [conjugate to E/M]"
    } else {
        "time [1/omega]"
    }
}

/// CSV text with LF line endings.
#[derive(Debug, Default)]
struct Csv(String);

impl Csv {
    fn new(header: &[&str]) -> Self {
        let mut c = Csv(String::new());
        c.row(header.iter().map(|s| s.to_string()));
        c
    }

    fn row(&mut self, cells: impl IntoIterator<Item = String>) {
        let line: Vec<String> = cells.into_iter().collect();
        let _ = writeln!(self.0, "{}", line.join(","));
    }
}

/// Files produced by one command.
#[derive(Debug)]
pub struct Output {
    pub files: Vec<(String, String)>,
    pub results: Value,
}

/// Runs `command` and writes its files; returns the output directory.
pub fn execute(command: Command, config: &RunConfig) -> Result<PathBuf, CliError> {
    let start = Instant::now();
    let outcome = compute(command, config);
    let elapsed = start.elapsed().as_secs_f64();
    let (output, failure) = match outcome {
        Ok(o) => (o, None),
        Err((Some(o), e)) => (o, Some(e)),
        Err((None, e)) => return Err(e),
    };
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (name, text) in &output.files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(io_err(&path))?;
    }
    let parameters: serde_json::Map<String, Value> = config
        .resolved_pairs()
        .into_iter()
        .map(|(k, v)| (k.to_string(), Value::String(v)))
        .collect();
    let meta = json!({
        "command": command.name(),
        "library_version": env!("CARGO_PKG_VERSION"),
        "scaled": config.scaled,
        "seed": config.seed,
        "parameters": parameters,
        "timing": { "wall_seconds": elapsed },
        "results": output.results,
    });
    let meta_path = dir.join(format!("{}.meta.json", command.name()));
    let text = serde_json::to_string_pretty(&meta).expect("json values serialize") + "\n";
    std::fs::write(&meta_path, text).map_err(io_err(&meta_path))?;
    let resolved = dir.join("resolved.config");
    std::fs::write(&resolved, config.render()).map_err(io_err(&resolved))?;
    match failure {
        Some(e) => Err(e),
        None => Ok(dir.clone()),
    }
}

type Outcome = Result<Output, (Option<Output>, CliError)>;

fn fail<E: Into<CliError>>(e: E) -> (Option<Output>, CliError) {
    (None, e.into())
}

/// Computes a command without touching the filesystem.
pub fn compute(command: Command, config: &RunConfig) -> Outcome {
    let name = command.name();
    let scaled = config.scaled;
    let model = &config.model;
    let size = model.size_parameter();
    let to = |e: f64| if scaled { e / size } else { e };
    let from_scaled = |e: f64| if scaled { e } else { e * size };
    let csv_name = format!("{name}.csv");
    match command {
        Command::Spectrum => {
            let h = build_hamiltonian(model, false).map_err(fail)?;
            let s = eigenvalues(&h).map_err(fail)?;
            let mut csv = Csv::new(&["index", energy_header(scaled)]);
            for (i, e) in s.energies().iter().enumerate() {
                csv.row([i.to_string(), f(to(*e))]);
            }
            let ground = s.energies().first().copied().unwrap_or(f64::NAN);
            Ok(Output {
                files: vec![(csv_name, csv.0)],
                results: json!({ "dim": s.len(), "ground_energy": to(ground) }),
            })
        }
        Command::Levels => {
            let table = level_dynamics(model, &config.lambda_grid.values()).map_err(fail)?;
            let mut csv = Csv::new(&["lambda", "index", energy_header(scaled)]);
            for (l, lambda) in table.lambdas.iter().enumerate() {
                for (i, e) in table.energies[l].iter().enumerate() {
                    csv.row([f(*lambda), i.to_string(), f(to(*e))]);
                }
            }
            Ok(Output {
                files: vec![(csv_name, csv.0)],
                results: json!({ "lambdas": table.lambdas.len(), "levels": table.levels() }),
            })
        }
        Command::Density => {
            let h = build_hamiltonian(model, false).map_err(fail)?;
            let s = eigenvalues(&h).map_err(fail)?;
            let curve = smoothed_level_density(&s, &config.density, scaled).map_err(fail)?;
            let mut csv = Csv::new(&[energy_header(scaled), density_header(scaled)]);
            for (x, y) in curve.grid.iter().zip(&curve.values) {
                csv.row([f(*x), f(*y)]);
            }
            let peak = curve.argmax_within(f64::NEG_INFINITY, f64::INFINITY);
            Ok(Output {
                files: vec![(csv_name, csv.0)],
                results: json!({
                    "levels": s.len(),
                    "kernel_rule": curve.kernel_rule,
                    "integral": curve.integral(),
                    "argmax": peak,
                }),
            })
        }
        Command::Expect => {
            let h = build_hamiltonian(model, false).map_err(fail)?;
            let s = diagonalize(&h).map_err(fail)?;
            let values = expectation_values(&s, config.observable).map_err(fail)?;
            let obs = config.observable.name();
            let mut csv = Csv::new(&["index", energy_header(scaled), obs]);
            for (i, (e, o)) in values.iter().enumerate() {
                csv.row([i.to_string(), f(from_scaled(*e)), f(*o)]);
            }
            Ok(Output {
                files: vec![(csv_name, csv.0)],
                results: json!({ "observable": obs, "states": values.len() }),
            })
        }
        Command::Classical => classical(config, &csv_name),
        Command::Quench => {
            let setup = QuenchSetup::new(model.with_lambda(config.quench.lambda1), config.quench.lambda2)
                .with_initial_index(config.quench.initial_index)
                .with_times(config.quench.time_grid.values(), time_convention(scaled));
            let result = run_quench(&setup).map_err(fail)?;
            let (files, results) = quench_files(name, config, &result).map_err(fail)?;
            Ok(Output { files, results })
        }
        Command::CriticalQuench => {
            let params1 = model.with_lambda(config.quench.lambda1);
            let cq = critical_quench(&params1, config.quench.initial_index).map_err(fail)?;
            let units = if scaled { "[E/M in units of omega]" } else { "[units of omega]" };
            let headers = [
                "lambda1".to_string(),
                "delta_c".to_string(),
                "lambda2".to_string(),
                format!("energy1 {units}"),
                format!("slope {units} per unit lambda"),
                format!("energy_c {units}"),
                format!("mean_energy2 {units}"),
            ];
            let mut csv = Csv::new(&headers.iter().map(String::as_str).collect::<Vec<_>>());
            csv.row([
                f(cq.lambda1),
                f(cq.delta_c),
                f(cq.lambda2),
                f(from_scaled(cq.energy1)),
                f(from_scaled(cq.slope)),
                f(from_scaled(cq.energy_c)),
                f(from_scaled(cq.mean_energy2)),
            ]);
            let setup = QuenchSetup::new(params1, cq.lambda2)
                .with_initial_index(config.quench.initial_index)
                .with_times(config.quench.time_grid.values(), time_convention(scaled));
            let result = run_quench(&setup).map_err(fail)?;
            let (mut files, quench) = quench_files(name, config, &result).map_err(fail)?;
            // The survival curve of the critical quench goes to a side file.
            files[0].0 = format!("{name}_survival.csv");
            files.insert(0, (csv_name, csv.0));
            Ok(Output {
                files,
                results: json!({ "critical": cq, "quench": quench }),
            })
        }
        Command::Converge => {
            let c = &config.converge;
            let report = truncation_convergence(model, &c.schedule, c.energy_min, c.energy_max, c.tol).map_err(fail)?;
            let mut csv = Csv::new(&[
                "n_trunc",
                "n_trunc_next",
                "dim",
                "levels_in_window",
                "max_drift [units of omega]",
                "within_tol",
            ]);
            for pair in report.steps.windows(2) {
                let drift = pair[0].drift.expect("all but the last step carry a drift");
                csv.row([
                    pair[0].n_trunc.to_string(),
                    pair[1].n_trunc.to_string(),
                    pair[0].dim.to_string(),
                    pair[0].levels_in_window.to_string(),
                    f(drift),
                    (drift <= c.tol).to_string(),
                ]);
            }
            let output = Output {
                files: vec![(csv_name, csv.0)],
                results: json!({ "chosen_n_trunc": report.chosen, "report": report }),
            };
            if report.passed() {
                Ok(output)
            } else {
                Err((Some(output), CliError::NotConverged { tol: c.tol }))
            }
        }
    }
}

fn time_convention(scaled: bool) -> TimeConvention {
    if scaled {
        TimeConvention::Scaled
    } else {
        TimeConvention::Unscaled
    }
}

fn classical(config: &RunConfig, csv_name: &str) -> Outcome {
    let model = ClassicalModel::from_params(&config.model);
    model.validate().map_err(fail)?;
    let size = config.model.size_parameter();
    let scaled = config.scaled;
    let (e_unit, d_unit) = if scaled { (1.0, 1.0) } else { (size, size) };
    let mc = config.monte_carlo();
    let mut csv = Csv::new(&[
        energy_header(scaled),
        "phase_space_volume",
        "phase_space_volume_stderr",
        density_header(scaled),
    ]);
    let energies = config.classical.energy_grid.values();
    let factor = (size / (2.0 * std::f64::consts::PI)).powi(model.degrees_of_freedom() as i32);
    // Energies below the potential minimum enclose no phase space.
    let floor = minimize_potential(&model).map_err(fail)?.energy;
    let rows = energies
        .iter()
        .map(|&e| {
            if e < floor {
                return Ok((e, 0.0, 0.0, 0.0));
            }
            phase_space_volume(&model, e, &mc).map(|v| (e, v.value, v.stderr, factor * v.value))
        })
        .collect::<crate::Result<Vec<_>>>()
        .map_err(fail)?;
    for (e, omega, stderr, density) in rows {
        csv.row([f(e * e_unit), f(omega), f(stderr), f(density / d_unit)]);
    }
    let crit = critical_data(&model);
    let minimum = minimize_potential(&model).map_err(fail)?;
    let g = model.g();
    let order = order_parameter(&model, g).map_err(fail)?;
    Ok(Output {
        files: vec![(csv_name.to_string(), csv.0)],
        results: json!({
            "degrees_of_freedom": model.degrees_of_freedom(),
            "lambda_c0": crit.lambda_c0,
            "energy_c": crit.energy_c * e_unit,
            "minimum": minimum,
            "ground_energy": minimum.energy * e_unit,
            "g": g,
            "order_parameter": order,
        }),
    })
}

/// Survival, discrete and smoothed distribution files of a quench.
fn quench_files(prefix: &str, config: &RunConfig, result: &QuenchResult) -> crate::Result<(Vec<(String, String)>, Value)> {
    let scaled = config.scaled;
    let q = &config.quench;
    let size = result.size;
    let to = |e: f64| if scaled { e / size } else { e };
    let from_scaled = |e: f64| if scaled { e } else { e * size };

    let mut survival = Csv::new(&[time_header(scaled), "survival_probability"]);
    for (t, p) in result.setup.time_grid.iter().zip(&result.survival) {
        survival.row([f(*t), f(*p)]);
    }

    let mut discrete = Csv::new(&["index", energy_header(scaled), "overlap", "weight"]);
    for (i, (e, c)) in result.energies2.iter().zip(&result.overlaps).enumerate() {
        discrete.row([i.to_string(), f(to(*e)), f(*c), f(c * c)]);
    }

    let energies: Vec<f64> = result.energies2.iter().map(|e| to(*e)).collect();
    let mut curve = smoothed_energy_distribution(&result.overlaps, &energies, q.grid_points)?;
    if q.smooth_window > 1 {
        curve = extra_smooth(&curve, q.smooth_window)?;
    }
    let mut smoothed = Csv::new(&[energy_header(scaled), density_header(scaled)]);
    for (x, y) in curve.grid.iter().zip(&curve.values) {
        smoothed.row([f(*x), f(*y)]);
    }

    let times = &result.setup.time_grid;
    let covered = times.first().is_some_and(|t| *t <= q.observe_start) && times.last().is_some_and(|t| *t >= q.observe_end);
    let metric = if covered {
        recurrence_metric(times, &result.survival, (0.0, q.decay_end), (q.observe_start, q.observe_end)).ok()
    } else {
        None
    };
    let results = json!({
        "lambda1": result.setup.params1.lambda,
        "lambda2": result.setup.lambda2,
        "initial_energy": from_scaled(result.initial_energy),
        "slope": from_scaled(result.slope),
        "mean_energy2": from_scaled(result.mean_energy),
        "completeness": result.completeness,
        "converged": result.converged,
        "inverse_participation": result.inverse_participation(),
        "recurrence_metric": metric,
        "smoothing": curve.kernel_rule,
    });
    Ok((
        vec![
            (format!("{prefix}.csv"), survival.0),
            (format!("{prefix}_distribution.csv"), discrete.0),
            (format!("{prefix}_smoothed.csv"), smoothed.0),
        ],
        results,
    ))
}
