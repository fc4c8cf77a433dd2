//! `summatoria`: compute summatory series, check them against asymptotic
//! models, and emit CSV tables and SVG plots.

mod commands;
mod config;
mod error;
mod svg;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config_text, RunConfig};
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "summatoria", version, about = "Exact summatory functions and checks of their asymptotics")]
struct Cli {
    /// `key = value` config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the series CSV `n,S,mean`.
    Compute(RunArgs),
    /// Compare a series with a model; exit 0 consistent, 1 inconsistent, 4 inconclusive.
    Validate(RunArgs),
    /// Draw an SVG of a series or report (log-x axis).
    Plot(RunArgs),
    /// Print a series, or a report when --model is given, as csv or text.
    Table(RunArgs),
    /// List function names.
    ListFunctions,
    /// List model names.
    ListModels,
}

#[derive(Args, Default)]
struct RunArgs {
    /// Function name (see list-functions).
    #[arg(long)]
    function: Option<String>,
    /// Model name with parameters, e.g. `density:0.607927`.
    #[arg(long)]
    model: Option<String>,
    /// `geometric`, `geometric:r=1.7783,start=1000`, or `1,2,10`.
    #[arg(long)]
    grid: Option<String>,
    /// Largest n; accepts `1e6`.
    #[arg(long)]
    n_max: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    /// Checkpoint CSV to resume from and update.
    #[arg(long)]
    checkpoint: Option<String>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<String>,
    /// csv, svg or text.
    #[arg(long)]
    format: Option<String>,
    /// Series or report CSV to plot.
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    prime_bound: Option<String>,
    #[arg(long)]
    power_bound: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<String>,
    #[arg(long)]
    ratio_cap: Option<String>,
    #[arg(long)]
    exponent_slack: Option<String>,
    #[arg(long)]
    stability_tol: Option<String>,
    #[arg(long)]
    decay_factor: Option<String>,
    /// Plot absolute values.
    #[arg(long)]
    abs: bool,
    /// Horizontal reference line for plots.
    #[arg(long, allow_hyphen_values = true)]
    reference: Option<String>,
    #[arg(long)]
    title: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, &String)> {
        let opts = [
            ("function", &self.function),
            ("model", &self.model),
            ("grid", &self.grid),
            ("n_max", &self.n_max),
            ("workers", &self.workers),
            ("checkpoint", &self.checkpoint),
            ("out", &self.out),
            ("format", &self.format),
            ("input", &self.input),
            ("prime_bound", &self.prime_bound),
            ("power_bound", &self.power_bound),
            ("kappa", &self.kappa),
            ("ratio_cap", &self.ratio_cap),
            ("exponent_slack", &self.exponent_slack),
            ("stability_tol", &self.stability_tol),
            ("decay_factor", &self.decay_factor),
            ("reference", &self.reference),
            ("title", &self.title),
        ];
        opts.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k, v))).collect()
    }
}

fn load_config(file: Option<&PathBuf>, args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut settings = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Input {
                path: path.clone(),
                source,
            })?;
            parse_config_text(&text)?
        }
        None => BTreeMap::new(),
    };
    for (k, v) in args.overrides() {
        settings.insert(k.to_string(), v.clone());
    }
    if args.abs {
        settings.insert("abs".into(), "true".into());
    }
    RunConfig::from_settings(&settings)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let file = cli.config.as_ref();
    match &cli.command {
        Command::Compute(a) => commands::compute(&load_config(file, a)?),
        Command::Validate(a) => commands::validate_cmd(&load_config(file, a)?),
        Command::Plot(a) => commands::plot(&load_config(file, a)?),
        Command::Table(a) => commands::table(&load_config(file, a)?),
        Command::ListFunctions => {
            print!("{}", commands::list_functions());
            Ok(0)
        }
        Command::ListModels => {
            print!("{}", commands::list_models());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { error::EXIT_CONFIG } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("summatoria: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
