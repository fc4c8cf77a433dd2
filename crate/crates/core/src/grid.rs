//! Checkpoint grids: geometric by default, or an explicit list.

use std::str::FromStr;

use crate::error::{Error, Result};

pub const DEFAULT_GRID_START: u64 = 1_000;

/// `10^{1/4}`: four checkpoints per decade.
pub fn default_ratio() -> f64 {
    10f64.powf(0.25)
}

/// `round(start·ratio^i)` for every value `≤ n_max`, deduplicated, with
/// `n_max` appended when it is not already the last point.
pub fn geometric_grid(start: u64, ratio: f64, n_max: u64) -> Result<Vec<u64>> {
    if start == 0 || n_max == 0 {
        return Err(Error::InvalidParameter("grid start and n_max must be positive".into()));
    }
    if !(ratio > 1.0 && ratio.is_finite()) {
        return Err(Error::InvalidParameter(format!("grid ratio must exceed 1, got {ratio}")));
    }
    let mut grid: Vec<u64> = Vec::new();
    for i in 0.. {
        let x = (start as f64 * ratio.powi(i)).round();
        if x > n_max as f64 {
            break;
        }
        let x = x as u64;
        if grid.last() != Some(&x) {
            grid.push(x);
        }
    }
    if grid.last() != Some(&n_max) {
        grid.push(n_max);
    }
    Ok(grid)
}

/// Parses `1000000`, `1_000_000` or `1e6`; the value must be a positive
/// integer below 2⁶³.
pub fn parse_integer(s: &str) -> Result<u64> {
    let t = s.trim().replace('_', "");
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let bad = || Error::InvalidParameter(format!("not a non-negative integer: `{s}`"));
    let x: f64 = t.parse().map_err(|_| bad())?;
    if !(x >= 0.0 && x < 9.2e18 && x.fract() == 0.0) {
        return Err(bad());
    }
    Ok(x as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Geometric { start: u64, ratio: f64 },
    Explicit(Vec<u64>),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Geometric {
            start: DEFAULT_GRID_START,
            ratio: default_ratio(),
        }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    /// `geometric`, `geometric:r=1.7783,start=1000`, or `1,2,10`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("geometric") {
            let GridSpec::Geometric { mut start, mut ratio } = GridSpec::default() else {
                unreachable!()
            };
            let params = match rest.strip_prefix(':') {
                Some(p) => p,
                None if rest.is_empty() => "",
                None => return Err(Error::InvalidParameter(format!("bad grid spec `{s}`"))),
            };
            for kv in params.split(',').filter(|kv| !kv.trim().is_empty()) {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidParameter(format!("grid parameter `{kv}` needs `=`")))?;
                match k.trim() {
                    "r" | "ratio" => {
                        ratio = v
                            .trim()
                            .parse()
                            .map_err(|_| Error::InvalidParameter(format!("grid ratio `{v}`")))?
                    }
                    "start" => start = parse_integer(v)?,
                    other => return Err(Error::InvalidParameter(format!("unknown grid parameter `{other}`"))),
                }
            }
            return Ok(GridSpec::Geometric { start, ratio });
        }
        if s.is_empty() {
            return Err(Error::InvalidGrid);
        }
        let points = s.split(',').map(parse_integer).collect::<Result<Vec<_>>>()?;
        Ok(GridSpec::Explicit(points))
    }
}

impl GridSpec {
    /// The checkpoint list. A geometric grid needs `n_max`; an explicit one
    /// must be strictly increasing, positive and not exceed `n_max`.
    pub fn resolve(&self, n_max: Option<u64>) -> Result<Vec<u64>> {
        match self {
            GridSpec::Geometric { start, ratio } => {
                let n_max = n_max.ok_or_else(|| Error::InvalidParameter("a geometric grid needs n_max".into()))?;
                geometric_grid(*start, *ratio, n_max)
            }
            GridSpec::Explicit(points) => {
                if points.is_empty() || points[0] == 0 || !points.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::InvalidGrid);
                }
                if let Some(cap) = n_max {
                    if *points.last().unwrap() > cap {
                        return Err(Error::BoundExceedsCap {
                            requested: *points.last().unwrap(),
                            cap,
                        });
                    }
                }
                Ok(points.clone())
            }
        }
    }
}
