//! CSV forms of series and checkpoints.
//!
//! Integers are written verbatim and reals in shortest round-trip form (which
//! always contains `.`, `e`, `inf` or `NaN`), so reading a file back gives the
//! identical series. Lines end in LF.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::compensated::CompensatedSum;
use crate::error::{Error, Result};
use crate::summatory::{AccumulatorState, SeriesValues, SummatorySeries};

pub const SERIES_HEADER: &str = "n,S,mean";
pub const CHECKPOINT_HEADER: &str = "function,n,S,sum,compensation";

/// Shortest decimal that parses back to `x`.
pub fn format_real(x: f64) -> String {
    format!("{x:?}")
}

fn format_value(series: &SummatorySeries, i: usize) -> String {
    match series.values() {
        SeriesValues::Exact(v) => v[i].to_string(),
        SeriesValues::Real(v) => format_real(v[i]),
    }
}

pub fn series_to_csv(series: &SummatorySeries) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for (i, &n) in series.grid().iter().enumerate() {
        out.push_str(&format!(
            "{n},{},{}\n",
            format_value(series, i),
            format_real(series.mean_value(i))
        ));
    }
    out
}

pub fn write_series_csv<W: Write>(series: &SummatorySeries, mut w: W) -> Result<()> {
    w.write_all(series_to_csv(series).as_bytes())?;
    Ok(())
}

fn format_err(path: &str, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.into(),
        reason: reason.into(),
    }
}

fn is_integer_literal(s: &str) -> bool {
    let digits = s.strip_prefix('-').unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

fn parse_values(cells: &[&str], origin: &str) -> Result<SeriesValues> {
    if cells.iter().all(|c| is_integer_literal(c)) {
        let v = cells
            .iter()
            .map(|c| c.parse::<i64>().map_err(|e| format_err(origin, format!("`{c}`: {e}"))))
            .collect::<Result<_>>()?;
        return Ok(SeriesValues::Exact(v));
    }
    if let Some(c) = cells.iter().find(|c| is_integer_literal(c)) {
        return Err(format_err(origin, format!("mixed integer and real values near `{c}`")));
    }
    let v = cells
        .iter()
        .map(|c| c.parse::<f64>().map_err(|e| format_err(origin, format!("`{c}`: {e}"))))
        .collect::<Result<_>>()?;
    Ok(SeriesValues::Real(v))
}

fn end_state(values: &SeriesValues, parts: Option<(f64, f64)>) -> AccumulatorState {
    match values {
        SeriesValues::Exact(v) => AccumulatorState::Exact(*v.last().unwrap()),
        SeriesValues::Real(v) => {
            let (sum, compensation) = parts.unwrap_or((*v.last().unwrap(), 0.0));
            AccumulatorState::Real(CompensatedSum::from_parts(sum, compensation))
        }
    }
}

fn data_lines<'a>(text: &'a str, header: &str, origin: &str) -> Result<Vec<&'a str>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == header => {}
        other => {
            return Err(format_err(
                origin,
                format!("expected header `{header}`, found `{}`", other.unwrap_or("")),
            ))
        }
    }
    let rows: Vec<&str> = lines.filter(|l| !l.trim().is_empty()).collect();
    if rows.is_empty() {
        return Err(format_err(origin, "no rows"));
    }
    Ok(rows)
}

/// Reads a series CSV back. The `mean` column is derived data and ignored.
pub fn series_from_csv(text: &str, function_name: &str) -> Result<SummatorySeries> {
    let origin = "<series>";
    let mut grid = Vec::new();
    let mut cells = Vec::new();
    for row in data_lines(text, SERIES_HEADER, origin)? {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 3 {
            return Err(format_err(origin, format!("row `{row}` needs 3 fields")));
        }
        grid.push(fields[0].parse::<u64>().map_err(|e| format_err(origin, format!("n `{}`: {e}", fields[0])))?);
        cells.push(fields[1]);
    }
    let values = parse_values(&cells, origin)?;
    let state = end_state(&values, None);
    SummatorySeries::from_parts(function_name, grid, values, state)
}

/// Checkpoint rows carry the function name; for real series the last row
/// also carries the raw accumulator parts, so that a resumed run matches a
/// cold run bit for bit.
pub fn checkpoint_to_csv(series: &SummatorySeries) -> String {
    let mut out = String::from(CHECKPOINT_HEADER);
    out.push('\n');
    let last = series.len() - 1;
    for (i, &n) in series.grid().iter().enumerate() {
        let parts = match (i == last, series.end_state()) {
            (true, AccumulatorState::Real(c)) => {
                let (sum, comp) = c.parts();
                format!("{},{}", format_real(sum), format_real(comp))
            }
            _ => ",".to_string(),
        };
        out.push_str(&format!("{},{n},{},{parts}\n", series.function_name(), format_value(series, i)));
    }
    out
}

pub fn checkpoint_from_csv(text: &str, origin: &str) -> Result<SummatorySeries> {
    let mut name: Option<&str> = None;
    let mut grid = Vec::new();
    let mut cells = Vec::new();
    let mut parts = None;
    let rows = data_lines(text, CHECKPOINT_HEADER, origin)?;
    let last = rows.len() - 1;
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 5 {
            return Err(format_err(origin, format!("row `{row}` needs 5 fields")));
        }
        match name {
            None => name = Some(fields[0]),
            Some(prev) if prev != fields[0] => {
                return Err(format_err(origin, format!("mixed functions `{prev}` and `{}`", fields[0])))
            }
            Some(_) => {}
        }
        grid.push(fields[1].parse::<u64>().map_err(|e| format_err(origin, format!("n `{}`: {e}", fields[1])))?);
        cells.push(fields[2]);
        if i == last && !fields[3].is_empty() {
            let real = |c: &str| c.parse::<f64>().map_err(|e| format_err(origin, format!("`{c}`: {e}")));
            parts = Some((real(fields[3])?, real(fields[4])?));
        }
    }
    let values = parse_values(&cells, origin)?;
    let state = end_state(&values, parts);
    SummatorySeries::from_parts(name.unwrap_or_default(), grid, values, state)
        .map_err(|e| format_err(origin, e.to_string()))
}

pub fn write_checkpoint(series: &SummatorySeries, path: &Path) -> Result<()> {
    fs::write(path, checkpoint_to_csv(series))?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<SummatorySeries> {
    let text = fs::read_to_string(path)?;
    checkpoint_from_csv(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{builtins, Summator};

    #[test]
    fn unit_row() {
        let s = Summator::sequential().compute_summatory(&builtins::unit(), &[5]).unwrap();
        assert_eq!(series_to_csv(&s), "n,S,mean\n5,5,1.0\n");
    }

    #[test]
    fn mertens_rows() {
        let s = Summator::sequential().mertens(&[1, 2, 10]).unwrap();
        assert_eq!(series_to_csv(&s), "n,S,mean\n1,1,1.0\n2,0,0.0\n10,-1,-0.1\n");
    }

    #[test]
    fn round_trips() {
        let sum = Summator::sequential();
        for spec in [builtins::omega(), builtins::log_phi(), builtins::reciprocal()] {
            let s = sum.compute_summatory(&spec, &[1, 7, 100, 12345]).unwrap();
            let back = series_from_csv(&series_to_csv(&s), spec.name()).unwrap();
            assert_eq!(back.grid(), s.grid());
            assert_eq!(back.values(), s.values());
            let cp = checkpoint_from_csv(&checkpoint_to_csv(&s), "t").unwrap();
            assert_eq!(cp, s);
        }
    }

    #[test]
    fn real_formatting_never_looks_integral() {
        for x in [1.0, -0.0, 1e16, 1e-7, 123456789.0, 0.1] {
            let s = format_real(x);
            assert!(!is_integer_literal(&s), "{s}");
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(series_from_csv("n,S\n1,1\n", "x").is_err());
        assert!(series_from_csv("n,S,mean\n", "x").is_err());
        assert!(series_from_csv("n,S,mean\n1,1,1.0\n2,1.5,0.75\n", "x").is_err());
        assert!(series_from_csv("n,S,mean\n2,1,1.0\n1,1,1.0\n", "x").is_err());
        assert!(checkpoint_from_csv("function,n,S,sum,compensation\na,1,1,,\nb,2,1,,\n", "x").is_err());
    }

    #[test]
    fn checkpoint_file_resume_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cp.csv");
        let sum = Summator::sequential().with_block_size(1000);
        let spec = builtins::reciprocal();
        let summand = crate::Summand::Function(spec.clone());
        let first = sum.compute_summatory(&spec, &[10, 5000]).unwrap();
        write_checkpoint(&first, &path).unwrap();
        let loaded = read_checkpoint(&path).unwrap();
        let resumed = sum.resume(&summand, &loaded, &[10, 5000, 77777]).unwrap();
        let cold = sum.compute_summatory(&spec, &[10, 5000, 77777]).unwrap();
        assert_eq!(checkpoint_to_csv(&resumed), checkpoint_to_csv(&cold));
        assert_eq!(series_to_csv(&resumed), series_to_csv(&cold));
    }
}
