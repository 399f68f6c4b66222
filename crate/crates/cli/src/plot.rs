//! Minimal deterministic SVG line charts.
//!
//! No external renderer: the chart is a fixed 640 x 420 viewport with one
//! polyline per series, a boxed plot area, min and max tick labels on both
//! axes and a small legend. All coordinates are formatted with fixed
//! precision so equal data produces an identical file. A failed write only
//! warns; charts are a convenience, not part of the report contract.

use std::path::Path;

use cltcert::report::round_sig;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 620.0;
const TOP: f64 = 46.0;
const BOTTOM: f64 = 372.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn short(v: f64) -> String {
    format!("{}", round_sig(v, 4))
}

fn text(x: f64, y: f64, anchor: &str, fill: &str, size: u32, content: &str) -> String {
    format!(
        "  <text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\" fill=\"{fill}\" \
         font-family=\"sans-serif\" font-size=\"{size}\">{content}</text>\n"
    )
}

pub fn render(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let finite: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x_lo, mut x_hi) = finite
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| {
            (lo.min(x), hi.max(x))
        });
    let (mut y_lo, mut y_hi) = finite
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| {
            (lo.min(y), hi.max(y))
        });
    if !x_lo.is_finite() || !x_hi.is_finite() {
        (x_lo, x_hi) = (0.0, 1.0);
    }
    if !y_lo.is_finite() || !y_hi.is_finite() {
        (y_lo, y_hi) = (0.0, 1.0);
    }
    if x_hi - x_lo < 1e-300 {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if y_hi - y_lo < 1e-300 {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    let pad_y = 0.05 * (y_hi - y_lo);
    y_lo -= pad_y;
    y_hi += pad_y;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * (RIGHT - LEFT);
    let sy = |y: f64| BOTTOM - (y - y_lo) / (y_hi - y_lo) * (BOTTOM - TOP);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH:.0} {HEIGHT:.0}\">\n\
         <rect width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" fill=\"white\"/>\n"
    );
    svg.push_str(&format!(
        "  <rect x=\"{LEFT:.1}\" y=\"{TOP:.1}\" width=\"{:.1}\" height=\"{:.1}\" \
         fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n",
        RIGHT - LEFT,
        BOTTOM - TOP
    ));
    svg.push_str(&text(WIDTH / 2.0, 24.0, "middle", "#000000", 15, title));
    svg.push_str(&text(WIDTH / 2.0, 408.0, "middle", "#000000", 12, x_label));
    svg.push_str(&text(16.0, TOP - 10.0, "start", "#000000", 12, y_label));
    // Min and max ticks on both axes.
    svg.push_str(&text(LEFT, BOTTOM + 18.0, "middle", "#333333", 11, &short(x_lo)));
    svg.push_str(&text(RIGHT, BOTTOM + 18.0, "middle", "#333333", 11, &short(x_hi)));
    svg.push_str(&text(LEFT - 6.0, BOTTOM + 4.0, "end", "#333333", 11, &short(y_lo)));
    svg.push_str(&text(LEFT - 6.0, TOP + 4.0, "end", "#333333", 11, &short(y_hi)));

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if pts.len() == 1 {
            let xy: Vec<&str> = pts[0].split(',').collect();
            svg.push_str(&format!(
                "  <circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>\n",
                xy[0], xy[1]
            ));
        } else if !pts.is_empty() {
            svg.push_str(&format!(
                "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                pts.join(" ")
            ));
        }
        svg.push_str(&text(
            RIGHT - 4.0,
            TOP + 16.0 + 15.0 * i as f64,
            "end",
            color,
            11,
            &s.label,
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Write the chart; failures are reported as warnings and swallowed.
pub fn write(path: &Path, title: &str, x_label: &str, y_label: &str, series: &[Series]) {
    if let Err(e) = std::fs::write(path, render(title, x_label, y_label, series)) {
        eprintln!("warning: could not write plot {}: {e}", path.display());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_is_deterministic_and_skips_bad_points() {
        let series = [
            Series { label: "a".into(), points: vec![(0.0, 1.0), (1.0, f64::NAN), (2.0, 3.0)] },
            Series { label: "b".into(), points: vec![(0.5, 2.0)] },
        ];
        let one = render("t", "x", "y", &series);
        assert_eq!(one, render("t", "x", "y", &series));
        assert!(one.contains("<polyline"));
        assert!(one.contains("<circle"));
        assert!(!one.contains("NaN"));
        let empty = render("t", "x", "y", &[]);
        assert!(empty.starts_with("<svg"));
    }
}
