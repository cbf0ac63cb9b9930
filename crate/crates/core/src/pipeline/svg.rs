//! Self-contained SVG scatter plots of predictions against targets.

use std::fmt::Write as _;

use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotLabels {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

impl PlotLabels {
    pub fn targets_vs_predictions(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: "target".into(),
            y_label: "prediction".into(),
        }
    }
}

/// Rendered plot and the raw pairs behind it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scatter {
    pub svg: String,
    pub csv: String,
}

const LEFT: f64 = 70.0;
const TOP: f64 = 40.0;
/// Side of the square plotting area; both axes share one scale so the
/// identity line is the geometric diagonal.
const SIDE: f64 = 400.0;
const WIDTH: f64 = LEFT + SIDE + 20.0;
const HEIGHT: f64 = TOP + SIDE + 55.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Tick positions at a 1-2-5 step covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Scatter of `(target, prediction)` pairs with axis ticks and the `y = x`
/// reference line. Output is deterministic for identical input.
pub fn emit_scatter_svg(pairs: &[(f64, f64)], labels: &PlotLabels) -> Result<Scatter, PipelineError> {
    if pairs.is_empty() {
        return Err(PipelineError::InvalidInput("scatter plot needs at least one pair".into()));
    }
    if pairs.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
        return Err(PipelineError::InvalidInput("scatter plot pairs must be finite".into()));
    }
    let (mut lo, mut hi) = pairs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(t, p)| {
            (lo.min(t).min(p), hi.max(t).max(p))
        });
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let px = |v: f64| LEFT + (v - lo) / (hi - lo) * SIDE;
    let py = |v: f64| TOP + SIDE - (v - lo) / (hi - lo) * SIDE;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + SIDE / 2.0,
        escape(&labels.title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{SIDE}" height="{SIDE}" fill="none" stroke="#333" stroke-width="1"/>"##
    );

    let _ = writeln!(s, r##"<g id="ticks" stroke="#333" stroke-width="1">"##);
    for t in ticks(lo, hi) {
        let (x, y) = (px(t), py(t));
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/><line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}"/>"#,
            TOP + SIDE,
            TOP + SIDE + 5.0,
            LEFT - 5.0
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<g id="tick-labels" fill="#333" stroke="none">"##);
    for t in ticks(lo, hi) {
        let label = tick_label(t);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{label}</text><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            px(t),
            TOP + SIDE + 18.0,
            LEFT - 8.0,
            py(t) + 4.0
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + SIDE / 2.0,
        TOP + SIDE + 40.0,
        escape(&labels.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + SIDE / 2.0,
        TOP + SIDE / 2.0,
        escape(&labels.y_label)
    );
    let _ = writeln!(
        s,
        r##"<line id="diagonal" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c0392b" stroke-width="1.2"/>"##,
        px(lo),
        py(lo),
        px(hi),
        py(hi)
    );
    let _ = writeln!(s, r##"<g id="points" fill="#1f4e79" fill-opacity="0.7" stroke="none">"##);
    for &(t, p) in pairs {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3"/>"#, px(t), py(p));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");

    let mut csv = String::from("target,prediction\n");
    for (t, p) in pairs {
        let _ = writeln!(csv, "{t},{p}");
    }
    Ok(Scatter { svg: s, csv })
}
