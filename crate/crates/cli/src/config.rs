//! Flat `key = value` experiment configuration with dotted section names.
//!
//! ```text
//! command = solve
//! problem.m = 2
//! problem.f.kind = power
//! problem.f.p = 2
//! problem.weight.sigma = -1
//! grid.n = 512
//! ```
//!
//! `#` starts a comment. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use polyharmonic::iteration::IterationOptions;
use polyharmonic::nonlinearity::{Nonlinearity, NonlinearityKind, Weight, WeightKind};
use serde::Serialize;

use crate::error::CliError;

const KNOWN_KEYS: &[&str] = &[
    "command",
    "problem.m",
    "problem.f.kind",
    "problem.f.p",
    "problem.f.gamma",
    "problem.f.c",
    "problem.f.delta",
    "problem.f.coeffs",
    "problem.f.table",
    "problem.f.scale",
    "problem.weight.kind",
    "problem.weight.sigma",
    "problem.weight.coef",
    "problem.weight.k",
    "problem.weight.r0",
    "problem.weight.table",
    "problem.alpha",
    "problem.alpha_fraction",
    "problem.beta",
    "grid.n",
    "grid.epsilon",
    "grid.radius",
    "grid.grading",
    "barrier.gamma",
    "barrier.c",
    "tolerance.tol",
    "tolerance.max_iter",
    "classify.t_max",
    "charges.input",
    "charges.window_lo",
    "charges.window_hi",
    "example.mu",
    "example.r_min",
    "example.r_max",
    "estimates.deltas",
    "estimates.rho",
    "property.trials",
    "property.seed",
    "output.dir",
    "output.csv",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Classify,
    Charges,
    VerifyExample,
    CheckEstimates,
    PropertySuite,
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "solve" => Self::Solve,
            "classify" => Self::Classify,
            "charges" => Self::Charges,
            "verify-example" => Self::VerifyExample,
            "check-estimates" => Self::CheckEstimates,
            "property-suite" => Self::PropertySuite,
            other => return Err(CliError::Config(format!("unknown command `{other}`"))),
        })
    }
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::Classify => "classify",
            Self::Charges => "charges",
            Self::VerifyExample => "verify-example",
            Self::CheckEstimates => "check-estimates",
            Self::PropertySuite => "property-suite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaChoice {
    Absolute(f64),
    /// Fraction of the barrier's origin mass.
    Fraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridGrading {
    Geometric,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub n: usize,
    pub epsilon: f64,
    pub radius: Option<f64>,
    pub grading: GridGrading,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub m: usize,
    pub f: Option<Nonlinearity>,
    pub weight: Option<Weight>,
    pub alpha: AlphaChoice,
    pub beta: f64,
    pub grid: GridSpec,
    pub barrier_gamma: Option<f64>,
    pub barrier_c: Option<f64>,
    pub iteration: IterationOptions,
    pub t_max: f64,
    pub charges_input: Option<PathBuf>,
    pub charges_window: Option<(f64, f64)>,
    pub mu: f64,
    pub example_range: (f64, f64),
    /// Values of `δ / π²`.
    pub deltas: Vec<f64>,
    pub rho: f64,
    pub trials: usize,
    pub seed: u64,
    /// Not part of the report, so reports written to different places compare equal.
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub write_csv: bool,
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub grid_n: Option<usize>,
    pub tol: Option<f64>,
}

struct Raw {
    map: BTreeMap<String, (usize, String)>,
}

impl Raw {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!("line {}: unknown key `{key}`", lineno + 1)));
            }
            let value = value.trim().trim_matches('"').to_string();
            if map.insert(key.clone(), (lineno + 1, value)).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        Ok(Self { map })
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(_, v)| v.as_str())
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.map.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("line {line}: cannot parse `{key} = {v}`"))),
        }
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.get(key)?.ok_or_else(|| CliError::Config(format!("missing `{key}`")))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some((line, v)) = self.map.get(key) else { return Ok(None) };
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("line {line}: cannot parse `{key} = {v}`")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

/// Reads a two-column numeric table, skipping a non-numeric header row.
pub fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let columns = read_columns(path, 2)?;
    Ok((columns[0].clone(), columns[1].clone()))
}

/// Reads the first `count` columns of a CSV file, skipping a non-numeric header row.
pub fn read_columns(path: &Path, count: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut cols = vec![Vec::new(); count];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let parsed: Result<Vec<f64>, _> = (0..count)
            .map(|j| record.get(j).unwrap_or("").parse::<f64>())
            .collect();
        match parsed {
            Ok(row) => row.into_iter().zip(cols.iter_mut()).for_each(|(v, c)| c.push(v)),
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(CliError::Config(format!(
                    "{}: row {} is not {count} numbers",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(cols)
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = PathBuf::from(p);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

fn nonlinearity(raw: &Raw, base: &Path) -> Result<Option<Nonlinearity>, CliError> {
    let Some(kind) = raw.str("problem.f.kind") else { return Ok(None) };
    let f = match kind {
        "power" => Nonlinearity::power(raw.required("problem.f.p")?),
        "exponential" => Nonlinearity::exponential(raw.required("problem.f.gamma")?, raw.or("problem.f.c", 1.0)?),
        "exp_power" => Nonlinearity::exp_power(raw.required("problem.f.delta")?),
        "polynomial" => Nonlinearity::polynomial(
            raw.list("problem.f.coeffs")?.ok_or_else(|| CliError::Config("missing `problem.f.coeffs`".into()))?,
        ),
        "tabulated" => {
            let path = resolve(base, &raw.required::<String>("problem.f.table")?);
            let (t, f) = read_table(&path)?;
            Nonlinearity::tabulated(t, f).map_err(|e| CliError::Config(e.to_string()))?
        }
        other => return Err(CliError::Config(format!("unknown nonlinearity kind `{other}`"))),
    };
    let scale: f64 = raw.or("problem.f.scale", 1.0)?;
    if !(scale > 0.0) {
        return Err(CliError::Config("problem.f.scale must be positive".into()));
    }
    Ok(Some(f.scaled(scale)))
}

fn weight(raw: &Raw, base: &Path) -> Result<Option<Weight>, CliError> {
    let kind = match raw.str("problem.weight.kind") {
        Some(k) => k,
        None if raw.str("problem.weight.sigma").is_some() => "power_law",
        None => return Ok(None),
    };
    let mut w = match kind {
        "power_law" => Weight::new(WeightKind::PowerLaw {
            coef: raw.or("problem.weight.coef", 1.0)?,
            sigma: raw.or("problem.weight.sigma", 0.0)?,
        }),
        "tabulated" => {
            let path = resolve(base, &raw.required::<String>("problem.weight.table")?);
            let (r, a) = read_table(&path)?;
            Weight::tabulated(r, a).map_err(|e| CliError::Config(e.to_string()))?
        }
        other => return Err(CliError::Config(format!("unknown weight kind `{other}`"))),
    };
    if let Some(k) = raw.get("problem.weight.k")? {
        w = w.with_exponent(k);
    }
    if let Some(r0) = raw.get("problem.weight.r0")? {
        w = w.with_positivity_radius(r0);
    }
    Ok(Some(w))
}

impl ExperimentConfig {
    /// Parses configuration text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let raw = Raw::parse(text)?;
        let command: Command = raw.required::<String>("command")?.parse()?;
        let m: usize = raw.or("problem.m", 2)?;
        if !(2..=4).contains(&m) {
            return Err(CliError::Config(format!("problem.m = {m} is outside 2..=4")));
        }
        let alpha = match (raw.get("problem.alpha")?, raw.get("problem.alpha_fraction")?) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("set only one of problem.alpha and problem.alpha_fraction".into()))
            }
            (Some(a), None) => AlphaChoice::Absolute(a),
            (None, Some(f)) => AlphaChoice::Fraction(f),
            (None, None) => AlphaChoice::Fraction(0.5),
        };
        let grading = match raw.str("grid.grading").unwrap_or("geometric") {
            "geometric" => GridGrading::Geometric,
            "uniform" => GridGrading::Uniform,
            other => return Err(CliError::Config(format!("unknown grading `{other}`"))),
        };
        let defaults = IterationOptions::default();
        let window = match (raw.get("charges.window_lo")?, raw.get("charges.window_hi")?) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            (None, None) => None,
            _ => return Err(CliError::Config("set both charges.window_lo and charges.window_hi".into())),
        };
        let cfg = Self {
            command,
            m,
            f: nonlinearity(&raw, base)?,
            weight: weight(&raw, base)?,
            alpha,
            beta: raw.or("problem.beta", 1.0)?,
            grid: GridSpec {
                n: raw.or("grid.n", 512)?,
                epsilon: raw.or("grid.epsilon", 1e-6)?,
                radius: raw.get("grid.radius")?,
                grading,
            },
            barrier_gamma: raw.get("barrier.gamma")?,
            barrier_c: raw.get("barrier.c")?,
            iteration: IterationOptions {
                tol: raw.or("tolerance.tol", defaults.tol)?,
                max_iter: raw.or("tolerance.max_iter", defaults.max_iter)?,
                ..defaults
            },
            t_max: raw.or("classify.t_max", 100.0)?,
            charges_input: raw.get::<String>("charges.input")?.map(|p| resolve(base, &p)),
            charges_window: window,
            mu: raw.or("example.mu", 2.0)?,
            example_range: (raw.or("example.r_min", 1e-3)?, raw.or("example.r_max", 0.1)?),
            deltas: raw.list("estimates.deltas")?.unwrap_or_else(|| vec![8.0, 16.0, 24.0]),
            rho: raw.or("estimates.rho", 0.05)?,
            trials: raw.or("property.trials", 100)?,
            seed: raw.or("property.seed", 0)?,
            out_dir: raw.get::<String>("output.dir")?.map_or_else(|| base.to_path_buf(), |p| resolve(base, &p)),
            write_csv: raw.or("output.csv", true)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(out) = &o.out {
            self.out_dir = out.clone();
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(n) = o.grid_n {
            self.grid.n = n;
        }
        if let Some(tol) = o.tol {
            self.iteration.tol = tol;
        }
        self.validate()
    }

    fn validate(&self) -> Result<(), CliError> {
        let needs_f = matches!(self.command, Command::Solve | Command::Classify | Command::CheckEstimates);
        if needs_f && self.f.is_none() {
            return Err(CliError::Config(format!("`{}` needs problem.f.kind", self.command.name())));
        }
        let needs_weight = matches!(self.command, Command::Solve | Command::CheckEstimates);
        if needs_weight && self.weight.is_none() {
            return Err(CliError::Config(format!("`{}` needs problem.weight", self.command.name())));
        }
        if self.command == Command::Charges && self.charges_input.is_none() {
            return Err(CliError::Config("`charges` needs charges.input".into()));
        }
        if self.grid.n < 16 {
            return Err(CliError::Config(format!("grid.n = {} is below 16", self.grid.n)));
        }
        if !(self.grid.epsilon > 0.0 && self.grid.epsilon < 1.0) {
            return Err(CliError::Config("grid.epsilon must lie in (0, 1)".into()));
        }
        if !(self.iteration.tol > 0.0) || self.iteration.max_iter == 0 {
            return Err(CliError::Config("tolerances must be positive".into()));
        }
        let (AlphaChoice::Absolute(a) | AlphaChoice::Fraction(a)) = self.alpha;
        if !(a >= 0.0) {
            return Err(CliError::Config("alpha must be nonnegative".into()));
        }
        if !(self.t_max >= 10.0) {
            return Err(CliError::Config("classify.t_max must be at least 10".into()));
        }
        if matches!(self.f.as_ref().map(|f| &f.kind), Some(NonlinearityKind::Tabulated { .. }))
            && self.command == Command::Classify
        {
            let (_, hi) = self.f.as_ref().and_then(|f| f.table_range()).unwrap_or((0.0, 0.0));
            if self.t_max > hi {
                return Err(CliError::Config(format!("classify.t_max = {} exceeds the table end {hi}", self.t_max)));
            }
        }
        Ok(())
    }
}
