//! Dependency-free SVG line plots with a logarithmic x axis. Output depends
//! only on the input points, so equal inputs give equal bytes.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 56.0;

pub struct Plot<'a> {
    pub title: &'a str,
    pub y_label: &'a str,
    /// `(n, y)` with `n ≥ 1`.
    pub points: &'a [(u64, f64)],
    /// Optional horizontal reference line.
    pub reference: Option<f64>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Tick step from {1, 2, 5}·10^k giving at most about six ticks.
fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let f = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    f * mag
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn render(plot: &Plot<'_>) -> String {
    let pts: Vec<(f64, f64)> = plot
        .points
        .iter()
        .filter(|p| p.1.is_finite())
        .map(|&(n, y)| ((n.max(1) as f64).log10(), y))
        .collect();
    let (mut x0, mut x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    x0 = x0.floor();
    x1 = x1.ceil().max(x0 + 1.0);
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    ys.extend(plot.reference);
    let (mut y0, mut y1) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if !(y1 > y0) {
        let pad = if y0.abs() > 0.0 { y0.abs() * 0.1 } else { 1.0 };
        y0 -= pad;
        y1 += pad;
    }
    let step = nice_step(y1 - y0);
    y0 = (y0 / step).floor() * step;
    y1 = (y1 / step).ceil() * step;

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(plot.title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    );
    for d in (x0 as i64)..=(x1 as i64) {
        let x = sx(d as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##,
            TOP + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">10<tspan dy="-5" font-size="9">{d}</tspan></text>"#,
            TOP + ph + 18.0
        );
    }
    let ticks = ((y1 - y0) / step).round() as i64;
    for i in 0..=ticks {
        let v = y0 + i as f64 * step;
        let y = sy(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            tick_label(v, step)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">n</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(plot.y_label)
    );
    if let Some(r) = plot.reference {
        let y = sy(r);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#c33" stroke-dasharray="6 4"/>"##,
            LEFT + pw
        );
    }
    let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(
        s,
        r##"<polyline fill="none" stroke="#1f5fa8" stroke-width="1.8" points="{}"/>"##,
        coords.join(" ")
    );
    for &(x, y) in &pts {
        let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#1f5fa8"/>"##, sx(x), sy(y));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<(u64, f64)> {
        vec![(1000, 0.608), (10_000, 0.6083), (100_000, 0.60794), (1_000_000, 0.607926)]
    }

    #[test]
    fn deterministic_and_well_formed() {
        let pts = sample();
        let p = Plot {
            title: "Q(n)/n & 6/π²",
            y_label: "density",
            points: &pts,
            reference: Some(0.607927),
        };
        let a = render(&p);
        assert_eq!(a, render(&p));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("&amp;"));
        assert_eq!(a.matches("<circle").count(), 4);
        assert!(a.contains("stroke-dasharray"));
        for d in 3..=6 {
            assert!(a.contains(&format!(">{d}</tspan>")));
        }
    }

    #[test]
    fn flat_series_gets_a_range() {
        let pts = vec![(10, 1.0), (100, 1.0)];
        let a = render(&Plot {
            title: "flat",
            y_label: "y",
            points: &pts,
            reference: None,
        });
        assert!(!a.contains("NaN") && !a.contains("inf"));
    }

    #[test]
    fn nice_steps() {
        assert_eq!(nice_step(1.0), 0.2);
        assert_eq!(nice_step(7.0), 2.0);
        assert_eq!(nice_step(0.0004), 0.0001);
        assert_eq!(tick_label(-0.0, 0.1), "0.0");
    }
}
