//! Self-contained SVG line charts of metrics series.

use std::collections::BTreeMap;
use std::fmt::Write;

use thiserror::Error;

use crate::io::MetricRecord;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_Y: f64 = 30.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("no data points to plot")]
    Empty,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotOptions {
    /// Metric names to include; empty means all.
    pub series: Vec<String>,
    /// Logarithmic y axis. Non-positive values are dropped.
    pub log_scale: bool,
    pub title: String,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            series: Vec::new(),
            log_scale: true,
            title: "metrics".into(),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders one polyline per `(metric, group)` pair.
pub fn render_svg(records: &[MetricRecord], opts: &PlotOptions) -> Result<String, PlotError> {
    let mut series: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        if !opts.series.is_empty() && !opts.series.iter().any(|s| s == &r.metric) {
            continue;
        }
        if !r.value.is_finite() || (opts.log_scale && r.value <= 0.0) {
            continue;
        }
        let y = if opts.log_scale { r.value.log10() } else { r.value };
        series
            .entry((r.metric.clone(), r.group.clone()))
            .or_default()
            .push((r.t as f64, y));
    }
    let points = series.values().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return Err(PlotError::Empty);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| MARGIN_Y + (y1 - y) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<title>{}</title>"#, escape(&opts.title));
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN_LEFT}" y="{MARGIN_Y}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
    );
    let label = |v: f64| {
        if opts.log_scale {
            format!("1e{v:.1}")
        } else {
            format!("{v:.3e}")
        }
    };
    for (v, anchor_y) in [(y1, MARGIN_Y), (y0, MARGIN_Y + plot_h)] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 6.0,
            anchor_y + 4.0,
            label(v)
        );
    }
    for (v, anchor_x) in [(x0, MARGIN_LEFT), (x1, MARGIN_LEFT + plot_w)] {
        let _ = writeln!(
            svg,
            r#"<text x="{anchor_x}" y="{}" text-anchor="middle">t={v}</text>"#,
            HEIGHT - MARGIN_Y + 16.0
        );
    }
    for (n, ((metric, group), pts)) in series.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let name = escape(&format!("{metric}:{group}"));
        let mut coords = String::with_capacity(pts.len() * 16);
        for &(x, y) in pts {
            let _ = write!(coords, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let _ = writeln!(
            svg,
            r#"<polyline data-series="{name}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.trim_end()
        );
        let ly = MARGIN_Y + 16.0 * n as f64 + 8.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{ly}" fill="{color}">{name}</text>"#,
            WIDTH - MARGIN_RIGHT + 10.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
