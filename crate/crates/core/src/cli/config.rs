//! Flat `section.key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Grids are written either
//! as `start:stop:count` (inclusive, evenly spaced) or as a comma list.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::classical::MonteCarloOptions;
use crate::models::{BergmannIndex, ModelKind, ModelParams, Parity};
use crate::spectra::{BandwidthRule, Observable};

/// Configuration error naming the offending key.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config key `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Evenly spaced or explicit list of values.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Range { start: f64, stop: f64, count: usize },
    List(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Range { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n)
                    .map(|i| start + (stop - start) * i as f64 / (*n - 1) as f64)
                    .collect(),
            },
            Grid::List(v) => v.clone(),
        }
    }

    fn parse(key: &str, text: &str) -> Result<Self, ConfigError> {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        if parts.len() == 3 {
            let count = parts[2]
                .parse::<usize>()
                .map_err(|_| err(key, format!("grid count `{}` is not a non-negative integer", parts[2])))?;
            if count == 0 {
                return Err(err(key, "grid count must be positive"));
            }
            return Ok(Grid::Range {
                start: parse_f64(key, parts[0])?,
                stop: parse_f64(key, parts[1])?,
                count,
            });
        }
        if parts.len() != 1 {
            return Err(err(key, "expected `start:stop:count` or a comma-separated list"));
        }
        let values = text
            .split(',')
            .map(|s| parse_f64(key, s.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Grid::List(values))
    }

    fn render(&self) -> String {
        match self {
            Grid::Range { start, stop, count } => format!("{start:?}:{stop:?}:{count}"),
            Grid::List(v) => v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(","),
        }
    }
}

fn parse_f64(key: &str, text: &str) -> Result<f64, ConfigError> {
    let v: f64 = text
        .parse()
        .map_err(|_| err(key, format!("`{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(err(key, format!("`{text}` is not finite")));
    }
    Ok(v)
}

fn parse_usize(key: &str, text: &str) -> Result<usize, ConfigError> {
    text.parse()
        .map_err(|_| err(key, format!("`{text}` is not a non-negative integer")))
}

fn parse_u64(key: &str, text: &str) -> Result<u64, ConfigError> {
    text.parse()
        .map_err(|_| err(key, format!("`{text}` is not a non-negative integer")))
}

fn parse_bool(key: &str, text: &str) -> Result<bool, ConfigError> {
    match text {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(err(key, format!("`{text}` is not a boolean"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuenchConfig {
    /// Defaults to `model.lambda`.
    pub lambda1: f64,
    pub lambda2: f64,
    pub initial_index: usize,
    pub time_grid: Grid,
    pub grid_points: usize,
    /// Moving-average window applied to the smoothed distribution; 1 disables it.
    pub smooth_window: usize,
    pub decay_end: f64,
    pub observe_start: f64,
    pub observe_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeConfig {
    pub schedule: Vec<usize>,
    /// Unscaled energy window; the lower end defaults to the ground state.
    pub energy_min: Option<f64>,
    pub energy_max: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalConfig {
    pub energy_grid: Grid,
    pub samples: u64,
    pub shell_width: f64,
    pub streams: u64,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub lambda_grid: Grid,
    pub density: BandwidthRule,
    pub observable: Observable,
    pub classical: ClassicalConfig,
    pub quench: QuenchConfig,
    pub converge: ConvergeConfig,
    pub out_dir: PathBuf,
    pub scaled: bool,
    pub seed: u64,
}

const KEYS: &[&str] = &[
    "model.kind",
    "model.size",
    "model.j",
    "model.omega",
    "model.omega0",
    "model.lambda",
    "model.k",
    "model.parity",
    "model.n_trunc",
    "levels.lambda_grid",
    "density.window",
    "density.grid_points",
    "density.margin",
    "expect.observable",
    "classical.energy_grid",
    "classical.samples",
    "classical.shell_width",
    "classical.streams",
    "quench.lambda1",
    "quench.lambda2",
    "quench.initial_index",
    "quench.time_grid",
    "quench.grid_points",
    "quench.smooth_window",
    "quench.decay_end",
    "quench.observe_start",
    "quench.observe_end",
    "converge.n_trunc_schedule",
    "converge.energy_min",
    "converge.energy_max",
    "converge.tol",
    "output.dir",
    "output.scaled",
    "run.seed",
];

/// Splits config text into key/value pairs, rejecting unknown and repeated keys.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(line, format!("line {} is not `key = value`", n + 1)));
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(err(key, "unknown key"));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(err(key, "key given more than once"));
        }
    }
    Ok(map)
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        Self::from_pairs(&parse_pairs(text)?)
    }

    pub fn from_pairs(map: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        if let Some(key) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(err(key, "unknown key"));
        }
        let get = |key: &str| map.get(key).map(String::as_str);

        let kind: ModelKind = match get("model.kind") {
            Some(v) => v.parse().map_err(|e: crate::Error| err("model.kind", e.to_string()))?,
            None => ModelKind::Su11,
        };
        let size = match (get("model.size"), get("model.j")) {
            (Some(_), Some(_)) => return Err(err("model.j", "give either model.size or model.j, not both")),
            (Some(s), None) => parse_usize("model.size", s)?,
            (None, Some(j)) => {
                let j = parse_f64("model.j", j)?;
                let four_j = 4.0 * j;
                if j <= 0.0 || (2.0 * j - (2.0 * j).round()).abs() > 1e-9 {
                    return Err(err("model.j", "must be a positive integer or half-integer"));
                }
                four_j.round() as usize
            }
            (None, None) => match kind {
                ModelKind::Dicke => 8,
                _ => 100,
            },
        };
        let size = u32::try_from(size).map_err(|_| err("model.size", "too large"))?;
        let n_trunc = match get("model.n_trunc") {
            Some(v) => parse_usize("model.n_trunc", v)?,
            None => 40,
        };
        let lambda = match get("model.lambda") {
            Some(v) => parse_f64("model.lambda", v)?,
            None => 1.5,
        };
        let mut model = match kind {
            ModelKind::Su11 => ModelParams::su11(size, lambda),
            ModelKind::JaynesCummings => ModelParams::jaynes_cummings(size, lambda),
            ModelKind::Dicke => {
                let mut p = ModelParams::su11(size, lambda);
                p.kind = ModelKind::Dicke;
                p.omega = 1.0;
                p.omega0 = 1.0;
                p.n_trunc = n_trunc;
                p.parity = Some(p.ground_parity());
                p
            }
        };
        if let Some(v) = get("model.omega") {
            model.omega = parse_f64("model.omega", v)?;
        }
        if let Some(v) = get("model.omega0") {
            model.omega0 = parse_f64("model.omega0", v)?;
        }
        if let Some(v) = get("model.k") {
            let k = parse_f64("model.k", v)?;
            model.k = BergmannIndex::from_value(k).map_err(|e| err("model.k", e.to_string()))?;
        }
        if let Some(v) = get("model.parity") {
            model.parity = match v {
                "both" => None,
                "+1" | "1" | "even" => Some(Parity::Even),
                "-1" | "odd" => Some(Parity::Odd),
                other => return Err(err("model.parity", format!("`{other}` is not +1, -1 or both"))),
            };
        }
        if kind != ModelKind::Dicke && get("model.n_trunc").is_some() {
            return Err(err("model.n_trunc", "only the Dicke model has a boson cutoff"));
        }
        if let Err(e) = model.validate() {
            let key = match &e {
                crate::Error::InvalidParameter { name, .. } => name.to_string(),
                _ => "model".to_string(),
            };
            return Err(err(&key, e.to_string()));
        }

        let lambda_grid = match get("levels.lambda_grid") {
            Some(v) => Grid::parse("levels.lambda_grid", v)?,
            None => Grid::Range {
                start: 0.0,
                stop: 2.0,
                count: 41,
            },
        };

        let mut density = BandwidthRule::default();
        if let Some(v) = get("density.window") {
            density.window = parse_usize("density.window", v)?;
            if density.window < 2 {
                return Err(err("density.window", "must be at least 2"));
            }
        }
        if let Some(v) = get("density.grid_points") {
            density.grid_points = parse_usize("density.grid_points", v)?;
            if density.grid_points < 2 {
                return Err(err("density.grid_points", "must be at least 2"));
            }
        }
        if let Some(v) = get("density.margin") {
            density.margin = parse_f64("density.margin", v)?;
            if density.margin < 0.0 {
                return Err(err("density.margin", "must be non-negative"));
            }
        }

        let observable = match get("expect.observable") {
            Some(v) => v.parse().map_err(|e: crate::Error| err("expect.observable", e.to_string()))?,
            None => Observable::default_for(kind),
        };

        let mc = MonteCarloOptions::default();
        let classical = ClassicalConfig {
            energy_grid: match get("classical.energy_grid") {
                Some(v) => Grid::parse("classical.energy_grid", v)?,
                None => Grid::Range {
                    start: -0.5,
                    stop: 1.0,
                    count: 61,
                },
            },
            samples: match get("classical.samples") {
                Some(v) => parse_u64("classical.samples", v)?,
                None => mc.samples,
            },
            shell_width: match get("classical.shell_width") {
                Some(v) => parse_f64("classical.shell_width", v)?,
                None => mc.shell_width,
            },
            streams: match get("classical.streams") {
                Some(v) => parse_u64("classical.streams", v)?,
                None => mc.streams,
            },
        };
        if classical.samples == 0 {
            return Err(err("classical.samples", "must be positive"));
        }
        if classical.streams == 0 {
            return Err(err("classical.streams", "must be positive"));
        }
        if !(classical.shell_width > 0.0) {
            return Err(err("classical.shell_width", "must be positive"));
        }

        let opt_f64 = |key: &str| get(key).map(|v| parse_f64(key, v)).transpose();
        let quench = QuenchConfig {
            lambda1: opt_f64("quench.lambda1")?.unwrap_or(model.lambda),
            lambda2: opt_f64("quench.lambda2")?.unwrap_or(model.lambda),
            initial_index: match get("quench.initial_index") {
                Some(v) => parse_usize("quench.initial_index", v)?,
                None => 0,
            },
            time_grid: match get("quench.time_grid") {
                Some(v) => Grid::parse("quench.time_grid", v)?,
                None => Grid::Range {
                    start: 0.0,
                    stop: 200.0,
                    count: 4001,
                },
            },
            grid_points: match get("quench.grid_points") {
                Some(v) => parse_usize("quench.grid_points", v)?,
                None => 4001,
            },
            smooth_window: match get("quench.smooth_window") {
                Some(v) => parse_usize("quench.smooth_window", v)?,
                None => match kind {
                    ModelKind::Dicke => 21,
                    _ => 1,
                },
            },
            decay_end: opt_f64("quench.decay_end")?.unwrap_or(50.0),
            observe_start: opt_f64("quench.observe_start")?.unwrap_or(50.0),
            observe_end: opt_f64("quench.observe_end")?.unwrap_or(200.0),
        };
        for (key, v) in [("quench.lambda1", quench.lambda1), ("quench.lambda2", quench.lambda2)] {
            if v < 0.0 {
                return Err(err(key, "coupling must be non-negative"));
            }
        }
        if quench.smooth_window % 2 == 0 {
            return Err(err("quench.smooth_window", "must be odd"));
        }
        if quench.grid_points < 2 {
            return Err(err("quench.grid_points", "must be at least 2"));
        }
        let times = quench.time_grid.values();
        if times.iter().any(|t| *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(err("quench.time_grid", "times must be non-negative and ascending"));
        }

        let converge = ConvergeConfig {
            schedule: match get("converge.n_trunc_schedule") {
                Some(v) => v
                    .split(',')
                    .map(|s| parse_usize("converge.n_trunc_schedule", s.trim()))
                    .collect::<Result<Vec<_>, _>>()?,
                None => vec![10, 20, 30, 40, 50, 60],
            },
            energy_min: opt_f64("converge.energy_min")?,
            energy_max: opt_f64("converge.energy_max")?.unwrap_or(0.0),
            tol: opt_f64("converge.tol")?.unwrap_or(1e-6),
        };
        if converge.schedule.len() < 2 || converge.schedule.windows(2).any(|w| w[1] <= w[0]) || converge.schedule[0] == 0 {
            return Err(err(
                "converge.n_trunc_schedule",
                "need at least two strictly increasing positive cutoffs",
            ));
        }
        if !(converge.tol > 0.0) {
            return Err(err("converge.tol", "must be positive"));
        }

        Ok(RunConfig {
            model,
            lambda_grid,
            density,
            observable,
            classical,
            quench,
            converge,
            out_dir: PathBuf::from(get("output.dir").unwrap_or("out")),
            scaled: match get("output.scaled") {
                Some(v) => parse_bool("output.scaled", v)?,
                None => true,
            },
            seed: match get("run.seed") {
                Some(v) => parse_u64("run.seed", v)?,
                None => 0,
            },
        })
    }

    pub fn monte_carlo(&self) -> MonteCarloOptions {
        MonteCarloOptions {
            samples: self.classical.samples,
            shell_width: self.classical.shell_width,
            seed: self.seed,
            streams: self.classical.streams,
        }
    }

    /// Every key with its resolved value, in a stable order.
    pub fn resolved_pairs(&self) -> Vec<(&'static str, String)> {
        let m = &self.model;
        let q = &self.quench;
        let c = &self.converge;
        let mut pairs = vec![
            ("model.kind", m.kind.name().to_string()),
            ("model.size", m.size.to_string()),
            ("model.omega", format!("{:?}", m.omega)),
            ("model.omega0", format!("{:?}", m.omega0)),
            ("model.lambda", format!("{:?}", m.lambda)),
            ("model.k", format!("{:?}", m.k.value())),
            (
                "model.parity",
                match m.parity {
                    None => "both".into(),
                    Some(Parity::Even) => "+1".into(),
                    Some(Parity::Odd) => "-1".into(),
                },
            ),
            ("levels.lambda_grid", self.lambda_grid.render()),
            ("density.window", self.density.window.to_string()),
            ("density.grid_points", self.density.grid_points.to_string()),
            ("density.margin", format!("{:?}", self.density.margin)),
            ("expect.observable", self.observable.name().to_string()),
            ("classical.energy_grid", self.classical.energy_grid.render()),
            ("classical.samples", self.classical.samples.to_string()),
            ("classical.shell_width", format!("{:?}", self.classical.shell_width)),
            ("classical.streams", self.classical.streams.to_string()),
            ("quench.lambda1", format!("{:?}", q.lambda1)),
            ("quench.lambda2", format!("{:?}", q.lambda2)),
            ("quench.initial_index", q.initial_index.to_string()),
            ("quench.time_grid", q.time_grid.render()),
            ("quench.grid_points", q.grid_points.to_string()),
            ("quench.smooth_window", q.smooth_window.to_string()),
            ("quench.decay_end", format!("{:?}", q.decay_end)),
            ("quench.observe_start", format!("{:?}", q.observe_start)),
            ("quench.observe_end", format!("{:?}", q.observe_end)),
            (
                "converge.n_trunc_schedule",
                c.schedule.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
            ),
            (
                "converge.energy_min",
                c.energy_min.map_or("ground".to_string(), |v| format!("{v:?}")),
            ),
            ("converge.energy_max", format!("{:?}", c.energy_max)),
            ("converge.tol", format!("{:?}", c.tol)),
            ("output.dir", self.out_dir.display().to_string()),
            ("output.scaled", self.scaled.to_string()),
            ("run.seed", self.seed.to_string()),
        ];
        if m.kind == ModelKind::Dicke {
            pairs.insert(7, ("model.n_trunc", m.n_trunc.to_string()));
        }
        pairs
    }

    /// The resolved configuration in the input format. `converge.energy_min`
    /// is omitted when it defaults to the ground state.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (key, value) in self.resolved_pairs() {
            if key == "converge.energy_min" && value == "ground" {
                continue;
            }
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = RunConfig::from_text("model.kind = jc\nmodel.size = 40 # comment\n\nmodel.lambda = 0.3\n").unwrap();
        assert_eq!(c.model, ModelParams::jaynes_cummings(40, 0.3));
        assert_eq!(c.observable, Observable::J0OverJ);
        assert!(c.scaled);

        let d = RunConfig::from_text("model.kind = dicke\nmodel.j = 2.5\nmodel.n_trunc = 12\nmodel.parity = -1").unwrap();
        assert_eq!(d.model.size, 10);
        assert_eq!(d.model.parity, Some(Parity::Odd));
        assert_eq!(d.quench.smooth_window, 21);
    }

    #[test]
    fn errors_name_the_key() {
        let bad = |text: &str| RunConfig::from_text(text).unwrap_err().key;
        assert_eq!(bad("model.frobnicate = 1"), "model.frobnicate");
        assert_eq!(bad("model.lambda = abc"), "model.lambda");
        assert_eq!(bad("model.size = 7"), "model.size");
        assert_eq!(bad("model.kind = lmg"), "model.kind");
        assert_eq!(bad("model.k = 0.5"), "model.k");
        assert_eq!(bad("quench.smooth_window = 4"), "quench.smooth_window");
        assert_eq!(bad("converge.n_trunc_schedule = 10,5"), "converge.n_trunc_schedule");
        assert_eq!(bad("model.lambda = 1\nmodel.lambda = 2"), "model.lambda");
        assert_eq!(bad("levels.lambda_grid = 0:1"), "levels.lambda_grid");
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = RunConfig::from_text(
            "model.kind = dicke\nmodel.j = 3\nlevels.lambda_grid = 0,0.25,1.5\nquench.lambda2 = 1.0000000000000002\nconverge.energy_min = -7.5",
        )
        .unwrap();
        let again = RunConfig::from_text(&c.render()).unwrap();
        assert_eq!(c, again);
        assert_eq!(again.render(), c.render());
        let jc = RunConfig::from_text("model.kind = jc\nmodel.size = 6").unwrap();
        assert_eq!(RunConfig::from_text(&jc.render()).unwrap(), jc);
    }

    #[test]
    fn grids() {
        let g = Grid::parse("g", "0:1:5").unwrap();
        assert_eq!(g.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(Grid::parse("g", "1, 2.5").unwrap().values(), vec![1.0, 2.5]);
        assert!(Grid::parse("g", "0:1:0").is_err());
    }
}
