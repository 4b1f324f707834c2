//! Minimal SVG 1.1 log-log charts: a framed plot area, decade ticks, one
//! polyline per series, optional markers at switch points.
//!
//! The data-to-pixel mapping is written into the `<desc>` element as JSON
//! (natural-log bounds plus the plot rectangle), so a consumer can recover
//! the plotted values from the polyline coordinates and check them against
//! exported CSV data.

use std::fmt::Write as _;

use lawtraverse::io::json_to_string_fixed;
use serde_json::json;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
/// Plot rectangle: left, top, right, bottom in pixel coordinates.
const PLOT: (f64, f64, f64, f64) = (70.0, 50.0, 690.0, 420.0);
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
];

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

pub struct LogLogPlot {
    title: String,
    x_label: String,
    y_label: String,
    series: Vec<Series>,
    markers: Vec<(f64, f64)>,
}

impl LogLogPlot {
    pub fn new(
        title: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
    ) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
            markers: Vec::new(),
        }
    }

    pub fn add_series(&mut self, label: impl Into<String>, points: Vec<(f64, f64)>) {
        self.series.push(Series {
            label: label.into(),
            points,
        });
    }

    pub fn add_marker(&mut self, x: f64, y: f64) {
        self.markers.push((x, y));
    }

    pub fn render(&self) -> String {
        // log axes can only carry positive finite values; everything else
        // (e.g. the zero-compute sample opening a trajectory) is dropped
        let plottable = |&(x, y): &(f64, f64)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite();
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for series in &self.series {
            for p in series.points.iter().filter(|p| plottable(p)) {
                xs.push(p.0.ln());
                ys.push(p.1.ln());
            }
        }
        for p in self.markers.iter().filter(|p| plottable(p)) {
            xs.push(p.0.ln());
            ys.push(p.1.ln());
        }
        let (ln_x_min, ln_x_max) = padded_bounds(&xs);
        let (ln_y_min, ln_y_max) = padded_bounds(&ys);
        let (px0, py0, px1, py1) = PLOT;
        let map_x = |v: f64| px0 + (v.ln() - ln_x_min) / (ln_x_max - ln_x_min) * (px1 - px0);
        let map_y = |v: f64| py1 - (v.ln() - ln_y_min) / (ln_y_max - ln_y_min) * (py1 - py0);

        let desc = json_to_string_fixed(&json!({
            "ln_x_min": ln_x_min,
            "ln_x_max": ln_x_max,
            "ln_y_min": ln_y_min,
            "ln_y_max": ln_y_max,
            "plot": [px0, py0, px1, py1],
            "series": self.series.iter().map(|s| s.label.as_str()).collect::<Vec<_>>(),
        }));

        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
             width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
        );
        let _ = writeln!(out, "  <desc>{}</desc>", escape_xml(&desc));
        let _ = writeln!(
            out,
            "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
        );
        let _ = writeln!(
            out,
            "  <rect x=\"{px0}\" y=\"{py0}\" width=\"{}\" height=\"{}\" \
             fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>",
            px1 - px0,
            py1 - py0
        );

        // decade ticks
        let ln10 = std::f64::consts::LN_10;
        for k in decades(ln_x_min, ln_x_max) {
            let px = px0 + (k as f64 * ln10 - ln_x_min) / (ln_x_max - ln_x_min) * (px1 - px0);
            let _ = writeln!(
                out,
                "  <line x1=\"{px:.3}\" y1=\"{py0}\" x2=\"{px:.3}\" y2=\"{py1}\" \
                 stroke=\"#ddd\" stroke-width=\"1\"/>"
            );
            let _ = writeln!(
                out,
                "  <text x=\"{px:.3}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\" \
                 fill=\"#333\">1e{k}</text>",
                py1 + 16.0
            );
        }
        for k in decades(ln_y_min, ln_y_max) {
            let py = py1 - (k as f64 * ln10 - ln_y_min) / (ln_y_max - ln_y_min) * (py1 - py0);
            let _ = writeln!(
                out,
                "  <line x1=\"{px0}\" y1=\"{py:.3}\" x2=\"{px1}\" y2=\"{py:.3}\" \
                 stroke=\"#ddd\" stroke-width=\"1\"/>"
            );
            let _ = writeln!(
                out,
                "  <text x=\"{}\" y=\"{:.3}\" font-size=\"11\" text-anchor=\"end\" \
                 fill=\"#333\">1e{k}</text>",
                px0 - 6.0,
                py + 4.0
            );
        }

        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let mut coords = String::new();
            for &(x, y) in series.points.iter().filter(|p| plottable(p)) {
                let _ = write!(coords, "{:.3},{:.3} ", map_x(x), map_y(y));
            }
            let _ = writeln!(
                out,
                "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" \
                 points=\"{}\"/>",
                coords.trim_end()
            );
            // legend entry
            let ly = py0 + 18.0 + 16.0 * i as f64;
            let _ = writeln!(
                out,
                "  <line x1=\"{}\" y1=\"{ly:.3}\" x2=\"{}\" y2=\"{ly:.3}\" \
                 stroke=\"{color}\" stroke-width=\"2\"/>",
                px1 - 150.0,
                px1 - 126.0
            );
            let _ = writeln!(
                out,
                "  <text x=\"{}\" y=\"{:.3}\" font-size=\"11\" fill=\"#333\">{}</text>",
                px1 - 120.0,
                ly + 4.0,
                escape_xml(&series.label)
            );
        }

        for &(x, y) in self.markers.iter().filter(|p| plottable(p)) {
            let _ = writeln!(
                out,
                "  <circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"3.5\" fill=\"#000\" \
                 stroke=\"white\" stroke-width=\"1\"/>",
                map_x(x),
                map_y(y)
            );
        }

        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"28\" font-size=\"14\" text-anchor=\"middle\" \
             fill=\"#111\">{}</text>",
            (px0 + px1) / 2.0,
            escape_xml(&self.title)
        );
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" \
             fill=\"#111\">{}</text>",
            (px0 + px1) / 2.0,
            py1 + 38.0,
            escape_xml(&self.x_label)
        );
        let _ = writeln!(
            out,
            "  <text x=\"18\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" \
             fill=\"#111\" transform=\"rotate(-90 18 {})\">{}</text>",
            (py0 + py1) / 2.0,
            (py0 + py1) / 2.0,
            escape_xml(&self.y_label)
        );
        out.push_str("</svg>\n");
        out
    }
}

/// Natural-log bounds with a little margin; degenerate or empty data gets a
/// fixed window so rendering never divides by zero.
fn padded_bounds(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, std::f64::consts::LN_10);
    }
    if lo == hi {
        return (lo - std::f64::consts::LN_2, hi + std::f64::consts::LN_2);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Integer decade exponents k with ln_lo <= k*ln(10) <= ln_hi.
fn decades(ln_lo: f64, ln_hi: f64) -> impl Iterator<Item = i32> {
    let ln10 = std::f64::consts::LN_10;
    let first = (ln_lo / ln10).ceil() as i32;
    let last = (ln_hi / ln10).floor() as i32;
    first..=last
}

fn escape_xml(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}
