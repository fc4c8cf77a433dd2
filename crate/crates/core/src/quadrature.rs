//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_depth: 50,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) || self.max_depth < 10 {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs positive tolerances and max_depth ≥ 10, got {self:?}"
            )));
        }
        Ok(())
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fb: f64) -> Self {
        let fm = f(0.5 * (a + b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        Self { a, b, fa, fm, fb, whole }
    }
}

fn simpson<F: Fn(f64) -> f64>(f: &F, p: Panel, eps: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (p.a + p.b);
    let left = Panel::new(f, p.a, m, p.fa, p.fm);
    let right = Panel::new(f, m, p.b, p.fm, p.fb);
    let delta = left.whole + right.whole - p.whole;
    if delta.abs() <= 15.0 * eps {
        return Ok(left.whole + right.whole + delta / 15.0);
    }
    if depth == 0 || !delta.is_finite() || m <= p.a || m >= p.b {
        return Err(Error::QuadratureDiverged { a: p.a, b: p.b });
    }
    Ok(simpson(f, left, 0.5 * eps, depth - 1)? + simpson(f, right, 0.5 * eps, depth - 1)?)
}

/// Break points: `a`, every power of two strictly inside `(a, b)`, `b`.
fn dyadic_breaks(a: f64, b: f64) -> Vec<f64> {
    let mut pts = vec![a];
    if a > 0.0 {
        let mut x = 2f64.powi(a.log2().floor() as i32 + 1);
        while x < b {
            if x > a {
                pts.push(x);
            }
            x *= 2.0;
        }
    }
    pts.push(b);
    pts
}

/// `∫_a^b f(t) dt`. The interval is first cut at powers of two, then each
/// piece is refined adaptively with a share of the error budget
/// proportional to its width.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, q: &QuadratureConfig) -> Result<f64> {
    q.validate()?;
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, q).map(|v| -v);
    }
    let breaks = dyadic_breaks(a, b);
    let coarse: f64 = breaks
        .windows(2)
        .map(|w| Panel::new(&f, w[0], w[1], f(w[0]), f(w[1])).whole)
        .sum();
    if !coarse.is_finite() {
        return Err(Error::QuadratureDiverged { a, b });
    }
    let eps = q.abs_tol.max(q.rel_tol * coarse.abs());
    let width = b - a;
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let panel = Panel::new(&f, w[0], w[1], f(w[0]), f(w[1]));
        total += simpson(&f, panel, eps * (w[1] - w[0]) / width, q.max_depth)?;
    }
    Ok(total)
}
