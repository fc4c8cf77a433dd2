//! Run configuration: `key = value` files merged with command-line flags.

use std::collections::BTreeMap;
use std::path::PathBuf;

use summatoria::grid::{parse_integer, GridSpec};
use summatoria::validation::ValidationPolicy;

use crate::error::CliError;

/// Largest `n_max` a run may request.
pub const N_MAX_LIMIT: u64 = 1_000_000_000;

pub const KEYS: &[&str] = &[
    "n_max",
    "grid",
    "function",
    "model",
    "workers",
    "checkpoint",
    "format",
    "out",
    "input",
    "prime_bound",
    "power_bound",
    "kappa",
    "ratio_cap",
    "exponent_slack",
    "stability_tol",
    "decay_factor",
    "abs",
    "reference",
    "title",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Svg,
    Text,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n_max: Option<u64>,
    pub grid: GridSpec,
    pub function: Option<String>,
    pub model: Option<String>,
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub prime_bound: u64,
    pub power_bound: u32,
    pub kappa: f64,
    pub policy: ValidationPolicy,
    pub abs: bool,
    pub reference: Option<f64>,
    pub title: Option<String>,
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::config("config", format!("line {}: expected `key = value`", i + 1)))?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::config(&key, format!("line {}: unknown key", i + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::config(key, format!("`{v}` is not a valid number")))
}

fn integer(key: &str, v: &str) -> Result<u64, CliError> {
    parse_integer(v).map_err(|e| CliError::config(key, e.to_string()))
}

impl RunConfig {
    /// Builds a config from merged settings (flags already laid over file
    /// values). Every error names the offending key.
    pub fn from_settings(settings: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let get = |k: &str| settings.get(k).map(String::as_str).filter(|v| !v.is_empty());
        let n_max = get("n_max").map(|v| integer("n_max", v)).transpose()?;
        if let Some(n) = n_max {
            if n == 0 || n > N_MAX_LIMIT {
                return Err(CliError::config("n_max", format!("{n} is outside 1..=10^9")));
            }
        }
        let grid: GridSpec = get("grid")
            .unwrap_or("geometric")
            .parse()
            .map_err(|e: summatoria::Error| CliError::config("grid", e.to_string()))?;
        let workers = get("workers").map(|v| integer("workers", v)).transpose()?.unwrap_or(1) as usize;
        if workers == 0 {
            return Err(CliError::config("workers", "must be at least 1"));
        }
        let format = match get("format") {
            None => None,
            Some("csv") => Some(OutputFormat::Csv),
            Some("svg") => Some(OutputFormat::Svg),
            Some("text") => Some(OutputFormat::Text),
            Some(other) => return Err(CliError::config("format", format!("`{other}` is not csv, svg or text"))),
        };
        let defaults = ValidationPolicy::default();
        let policy = ValidationPolicy {
            ratio_cap: get("ratio_cap").map(|v| number("ratio_cap", v)).transpose()?.unwrap_or(defaults.ratio_cap),
            exponent_slack: get("exponent_slack")
                .map(|v| number("exponent_slack", v))
                .transpose()?
                .unwrap_or(defaults.exponent_slack),
            stability_tol: get("stability_tol")
                .map(|v| number("stability_tol", v))
                .transpose()?
                .unwrap_or(defaults.stability_tol),
            decay_factor: get("decay_factor")
                .map(|v| number("decay_factor", v))
                .transpose()?
                .unwrap_or(defaults.decay_factor),
            ..defaults
        };
        let abs = match get("abs") {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => return Err(CliError::config("abs", format!("`{other}` is not true or false"))),
        };
        let power_bound = get("power_bound").map(|v| integer("power_bound", v)).transpose()?.unwrap_or(40);
        Ok(Self {
            n_max,
            grid,
            function: get("function").map(str::to_string),
            model: get("model").map(str::to_string),
            workers,
            checkpoint: get("checkpoint").map(PathBuf::from),
            format,
            out: get("out").map(PathBuf::from),
            input: get("input").map(PathBuf::from),
            prime_bound: get("prime_bound").map(|v| integer("prime_bound", v)).transpose()?.unwrap_or(1_000_000),
            power_bound: u32::try_from(power_bound)
                .map_err(|_| CliError::config("power_bound", "too large"))?,
            kappa: get("kappa").map(|v| number("kappa", v)).transpose()?.unwrap_or(1.0),
            policy,
            abs,
            reference: get("reference").map(|v| number("reference", v)).transpose()?,
            title: get("title").map(str::to_string),
        })
    }

    /// The checkpoint grid: explicit points, or the geometric grid to `n_max`.
    pub fn resolve_grid(&self) -> Result<Vec<u64>, CliError> {
        let grid = self
            .grid
            .resolve(self.n_max)
            .map_err(|e| CliError::config(if self.n_max.is_none() { "n_max" } else { "grid" }, e.to_string()))?;
        if let Some(&last) = grid.last() {
            if last > N_MAX_LIMIT {
                return Err(CliError::config("grid", format!("{last} exceeds 10^9")));
            }
        }
        Ok(grid)
    }

    pub fn function(&self) -> Result<&str, CliError> {
        self.function
            .as_deref()
            .ok_or_else(|| CliError::config("function", "required"))
    }
}
