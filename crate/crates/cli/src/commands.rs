use std::fs;
use std::io::Write;
use std::path::Path;

use summatoria::io::{read_checkpoint, series_to_csv, write_checkpoint};
use summatoria::models::{build_model, ModelParams, MODEL_NAMES};
use summatoria::quadrature::QuadratureConfig;
use summatoria::validation::{validate, ValidationReport, Verdict};
use summatoria::{builtins, Error, FunctionSpec, Kind, Registry, Summand, Summator, SummatorySeries};

use crate::config::{OutputFormat, RunConfig, N_MAX_LIMIT};
use crate::error::CliError;

pub const CACHE_ENV: &str = "SUMMATORIA_CACHE";

pub const EXIT_CONSISTENT: u8 = 0;
pub const EXIT_INCONSISTENT: u8 = 1;
pub const EXIT_INCONCLUSIVE: u8 = 4;

/// Registry names plus the summands that are not plain `Σ f(m)`.
pub fn resolve_summand(name: &str) -> Result<Summand, CliError> {
    let lookup = |n: &str| Registry.get(n).map_err(|e| CliError::config("function", e.to_string()));
    Ok(match name {
        "mertens" => Summand::Function(builtins::mobius()),
        "theta" => Summand::PrimeSum(builtins::log()),
        "prime_count" => Summand::PrimeCount,
        other => match other.strip_prefix("prime_sum:") {
            Some(inner) => {
                let f = lookup(inner)?;
                if f.kind() != Kind::Pointwise {
                    return Err(CliError::config("function", format!("prime_sum needs a pointwise function, got `{inner}`")));
                }
                Summand::PrimeSum(f)
            }
            None => Summand::Function(lookup(other)?),
        },
    })
}

fn summand_function(summand: &Summand) -> Option<&FunctionSpec> {
    match summand {
        Summand::Function(f) | Summand::PrimeSum(f) => Some(f),
        Summand::PrimeCount => None,
    }
}

fn summator(cfg: &RunConfig) -> Result<Summator, CliError> {
    let mut s = Summator::with_workers(cfg.workers)
        .map_err(|e| CliError::config("workers", e.to_string()))?
        .with_cap(N_MAX_LIMIT);
    if let Some(dir) = std::env::var_os(CACHE_ENV) {
        let _ = fs::create_dir_all(&dir);
        s = s.with_prime_cache(dir);
    }
    Ok(s)
}

/// The series on the configured grid, resumed from or cut from a checkpoint
/// when one matches, and written back to the checkpoint afterwards.
fn obtain_series(cfg: &RunConfig, summand: &Summand) -> Result<SummatorySeries, CliError> {
    let grid = cfg.resolve_grid()?;
    let s = summator(cfg)?;
    let Some(path) = &cfg.checkpoint else {
        return Ok(s.summatory(summand, &grid)?);
    };
    let previous = if path.exists() {
        let p = read_checkpoint(path).map_err(|e| CliError::config("checkpoint", e.to_string()))?;
        if p.function_name() != summand.name() {
            return Err(CliError::config(
                "checkpoint",
                format!("holds `{}`, not `{}`", p.function_name(), summand.name()),
            ));
        }
        Some(p)
    } else {
        None
    };
    let series = match previous {
        Some(p) if grid.starts_with(p.grid()) => s.resume(summand, &p, &grid)?,
        Some(p) if p.grid().starts_with(&grid) => return Ok(p.prefix(grid.len())?),
        _ => s.summatory(summand, &grid)?,
    };
    write_checkpoint(&series, path)?;
    Ok(series)
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, content)?,
        None => std::io::stdout().write_all(content.as_bytes())?,
    }
    Ok(())
}

pub fn compute(cfg: &RunConfig) -> Result<u8, CliError> {
    let summand = resolve_summand(cfg.function()?)?;
    let series = obtain_series(cfg, &summand)?;
    emit(cfg.out.as_deref(), &series_to_csv(&series))?;
    Ok(0)
}

fn model_error(e: Error) -> CliError {
    match e {
        Error::UnknownModel(_)
        | Error::InvalidParameter(_)
        | Error::WrongKind { .. }
        | Error::Precondition(_)
        | Error::UnknownFunction(_) => CliError::config("model", e.to_string()),
        other => CliError::Compute(other),
    }
}

fn report(cfg: &RunConfig, summand: &Summand, series: &SummatorySeries) -> Result<ValidationReport, CliError> {
    let name = cfg.model.as_deref().ok_or_else(|| CliError::config("model", "required"))?;
    let params = ModelParams {
        prime_bound: cfg.prime_bound,
        power_bound: cfg.power_bound,
        kappa: cfg.kappa,
        n_max: series.n_max(),
        quadrature: QuadratureConfig::default(),
    };
    let model = build_model(name, summand_function(summand), &params).map_err(model_error)?;
    validate(series, &model, &cfg.policy).map_err(|e| match e {
        Error::BelowModelFloor { .. } => CliError::config("grid", e.to_string()),
        other => CliError::Compute(other),
    })
}

pub fn validate_cmd(cfg: &RunConfig) -> Result<u8, CliError> {
    let summand = resolve_summand(cfg.function()?)?;
    if cfg.model.is_none() {
        return Err(CliError::config("model", "required"));
    }
    let series = obtain_series(cfg, &summand)?;
    let r = report(cfg, &summand, &series)?;
    match (&cfg.out, cfg.format) {
        (Some(p), _) => {
            fs::write(p, r.to_csv())?;
            emit(None, &r.to_text())?;
        }
        (None, Some(OutputFormat::Csv)) => emit(None, &r.to_csv())?,
        (None, _) => emit(None, &r.to_text())?,
    }
    Ok(match r.verdict {
        Verdict::Consistent => EXIT_CONSISTENT,
        Verdict::Inconsistent => EXIT_INCONSISTENT,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

/// `(header, rows)` of a CSV file written by this tool.
fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| CliError::config("input", format!("{} is empty", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    if rows.is_empty() {
        return Err(CliError::config("input", format!("{} has an empty grid", path.display())));
    }
    Ok((header, rows))
}

fn column(header: &[String], rows: &[Vec<String>], name: &str, path: &Path) -> Result<Vec<(u64, f64)>, CliError> {
    let bad = |m: String| CliError::config("input", format!("{}: {m}", path.display()));
    let n_col = header.iter().position(|h| h == "n").ok_or_else(|| bad("no `n` column".into()))?;
    let y_col = header.iter().position(|h| h == name).ok_or_else(|| bad(format!("no `{name}` column")))?;
    rows.iter()
        .map(|r| {
            let cell = |i: usize| r.get(i).ok_or_else(|| bad(format!("short row `{}`", r.join(","))));
            let n = cell(n_col)?.parse::<u64>().map_err(|_| bad(format!("bad n `{}`", r[n_col])))?;
            let y = cell(y_col)?.parse::<f64>().map_err(|_| bad(format!("bad value `{}`", r[y_col])))?;
            Ok((n, y))
        })
        .collect()
}

pub fn plot(cfg: &RunConfig) -> Result<u8, CliError> {
    let (title, y_label, mut points) = match (&cfg.input, &cfg.function) {
        (Some(path), _) => {
            let (header, rows) = read_table(path)?;
            let (col, label) = if header.iter().any(|h| h == "ratio") {
                ("ratio", "|R(n)|/envelope(n)")
            } else {
                ("mean", "S(n)/n")
            };
            let title = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            (title, label, column(&header, &rows, col, path)?)
        }
        (None, Some(name)) => {
            let summand = resolve_summand(name)?;
            let series = obtain_series(cfg, &summand)?;
            let pts = (0..series.len()).map(|i| (series.grid()[i], series.mean_value(i))).collect();
            (name.clone(), "S(n)/n", pts)
        }
        (None, None) => return Err(CliError::config("input", "give --input or --function")),
    };
    let y_label = if cfg.abs {
        for p in &mut points {
            p.1 = p.1.abs();
        }
        format!("|{y_label}|")
    } else {
        y_label.to_string()
    };
    let svg = crate::svg::render(&crate::svg::Plot {
        title: cfg.title.as_deref().unwrap_or(&title),
        y_label: &y_label,
        points: &points,
        reference: cfg.reference,
    });
    emit(cfg.out.as_deref(), &svg)?;
    Ok(0)
}

fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:>w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

pub fn table(cfg: &RunConfig) -> Result<u8, CliError> {
    let summand = resolve_summand(cfg.function()?)?;
    let series = obtain_series(cfg, &summand)?;
    let csv = match cfg.model {
        Some(_) => report(cfg, &summand, &series)?.to_csv(),
        None => series_to_csv(&series),
    };
    let out = match cfg.format {
        Some(OutputFormat::Csv) => csv,
        Some(OutputFormat::Svg) => return Err(CliError::config("format", "table writes csv or text")),
        _ => {
            let mut lines = csv.lines();
            let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
            let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
            aligned(&header, &rows)
        }
    };
    emit(cfg.out.as_deref(), &out)?;
    Ok(0)
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Additive => "additive",
        Kind::StronglyAdditive => "strongly additive",
        Kind::Multiplicative => "multiplicative",
        Kind::StronglyMultiplicative => "strongly multiplicative",
        Kind::Pointwise => "pointwise",
    }
}

pub fn list_functions() -> String {
    let mut rows: Vec<Vec<String>> = Registry::NAMES
        .iter()
        .map(|&name| {
            let probe = if name == "power_k" { "power_2" } else { name };
            let spec = Registry.get(probe).expect("built-in");
            let label = if name == "power_k" { "power_<k>" } else { name };
            vec![label.to_string(), kind_name(spec.kind()).to_string()]
        })
        .collect();
    for (name, what) in [
        ("mertens", "Σ μ(m)"),
        ("theta", "Σ_{p≤n} ln p"),
        ("prime_count", "π(n)"),
        ("prime_sum:<fn>", "Σ_{p≤n} f(p), pointwise f"),
    ] {
        rows.push(vec![name.to_string(), what.to_string()]);
    }
    aligned_left(&rows)
}

pub fn list_models() -> String {
    let rows: Vec<Vec<String>> = MODEL_NAMES.iter().map(|(n, d)| vec![n.to_string(), d.to_string()]).collect();
    aligned_left(&rows)
}

fn aligned_left(rows: &[Vec<String>]) -> String {
    let w = rows.iter().map(|r| r[0].chars().count()).max().unwrap_or(0);
    rows.iter()
        .map(|r| format!("{:<w$}  {}\n", r[0], r[1]))
        .collect()
}
