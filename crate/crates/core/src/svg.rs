//! Minimal deterministic SVG line plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// A labelled polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        if lo > hi {
            return Self { lo: 0.0, hi: 1.0 };
        }
        if lo == hi {
            let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
            return Self {
                lo: lo - pad,
                hi: hi + pad,
            };
        }
        Self { lo, hi }
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the series as a standalone SVG document.
pub fn render_svg(series: &[Series]) -> Result<String> {
    if let Some(s) = series
        .iter()
        .find(|s| s.points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()))
    {
        return Err(Error::Argument(format!("series '{}' has non-finite points", s.label)));
    }
    let xr = Range::of(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let yr = Range::of(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let (left, right) = (MARGIN, WIDTH - MARGIN);
    let (top, bottom) = (MARGIN, HEIGHT - MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<g stroke="black" stroke-width="1"><line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/><line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}"/></g>"#
    );
    let _ = writeln!(out, r#"<g font-family="monospace" font-size="11" fill="black">"#);
    let _ = writeln!(
        out,
        r#"<text x="{left}" y="{}" text-anchor="start">{:.4}</text>"#,
        bottom + 16.0,
        xr.lo
    );
    let _ = writeln!(
        out,
        r#"<text x="{right}" y="{}" text-anchor="end">{:.4}</text>"#,
        bottom + 16.0,
        xr.hi
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{bottom}" text-anchor="end">{:.4}</text>"#,
        left - 4.0,
        yr.lo
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text>"#,
        left - 4.0,
        top + 4.0,
        yr.hi
    );
    let _ = writeln!(out, "</g>");

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.3},{:.3}", xr.map(x, left, right), yr.map(y, bottom, top)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
            pts.join(" "),
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Writes [`render_svg`] output to `path`.
pub fn emit_svg(series: &[Series], path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(series)?)?;
    Ok(())
}
