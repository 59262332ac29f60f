//! Hand-rolled SVG emission for convergence plots.
//!
//! One polyline per series on a log-scale y axis with a shaded band of one
//! standard deviation around the mean, matching the usual presentation of
//! averaged optimization traces. Output is a plain string and depends only
//! on the input series, so emitted files are byte-stable.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::harness::AggregateStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    /// `|x_t - x_limit|`.
    Distance,
    /// `f(x_t) - f(x_limit)`.
    FValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    Iterations,
    Evaluations,
}

/// One labeled curve: mean values with a +-1 std band over an x grid.
#[derive(Debug, Clone)]
pub struct FigureSeries {
    pub label: String,
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FigureSeries {
    pub fn from_stats(
        label: String,
        stats: &AggregateStats,
        kind: FigureKind,
        x_axis: XAxis,
    ) -> Result<Self> {
        let (mean, std) = match kind {
            FigureKind::FValue => (stats.mean_f.clone(), stats.std_f.clone()),
            FigureKind::Distance => {
                if stats.mean_dist.is_empty() {
                    return Err(Error::InvalidArgument(format!(
                        "series `{label}` carries no distance data"
                    )));
                }
                (stats.mean_dist.clone(), stats.std_dist.clone())
            }
        };
        let x = match x_axis {
            XAxis::Iterations => (0..mean.len()).map(|t| t as f64).collect(),
            XAxis::Evaluations => stats.evals.iter().map(|e| *e as f64).collect(),
        };
        Ok(Self {
            label,
            x,
            mean,
            std,
        })
    }
}

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 560.0;
const PLOT_LEFT: f64 = 78.0;
const PLOT_RIGHT: f64 = 740.0;
const PLOT_TOP: f64 = 34.0;
const PLOT_BOTTOM: f64 = 505.0;
const MAX_POINTS: usize = 512;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
];

/// Render the series into a standalone SVG document.
pub fn emit_figure(series: &[FigureSeries]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("no series to plot".into()));
    }
    for s in series {
        if s.mean.is_empty() || s.mean.len() != s.x.len() || s.std.len() != s.mean.len() {
            return Err(Error::InvalidArgument(format!(
                "series `{}` is empty or has mismatched lengths",
                s.label
            )));
        }
    }

    // Positive range for the log axis; band edges at or below zero are
    // clamped to the plot floor.
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    for s in series {
        for i in 0..s.mean.len() {
            x_min = x_min.min(s.x[i]);
            x_max = x_max.max(s.x[i]);
            let hi = s.mean[i] + s.std[i];
            if hi > 0.0 {
                y_max = y_max.max(hi);
            }
            if s.mean[i] > 0.0 {
                y_min = y_min.min(s.mean[i]);
            }
        }
    }
    if !y_min.is_finite() || !y_max.is_finite() {
        return Err(Error::InvalidArgument(
            "no positive values to place on a log axis".into(),
        ));
    }
    if y_min == y_max {
        y_min /= 10.0;
        y_max *= 10.0;
    }
    if x_min == x_max {
        x_max += 1.0;
    }
    let ly_min = y_min.log10().floor();
    let ly_max = y_max.log10().ceil();
    let ly_span = (ly_max - ly_min).max(1.0);

    let px = |x: f64| PLOT_LEFT + (x - x_min) / (x_max - x_min) * (PLOT_RIGHT - PLOT_LEFT);
    let py = |y: f64| {
        let clamped = y.max(y_min * 1e-2).log10();
        PLOT_BOTTOM - (clamped - ly_min) / ly_span * (PLOT_BOTTOM - PLOT_TOP)
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );

    // Decade grid and y labels.
    let decade_step = (ly_span / 10.0).ceil().max(1.0) as i64;
    let mut decade = ly_min as i64;
    while decade <= ly_max as i64 {
        let y = py(10f64.powi(decade as i32));
        let _ = writeln!(
            svg,
            r##"<line x1="{PLOT_LEFT}" y1="{y:.2}" x2="{PLOT_RIGHT}" y2="{y:.2}" stroke="#dddddd" stroke-width="1"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">1e{decade}</text>"#,
            PLOT_LEFT - 6.0,
            y + 4.0
        );
        decade += decade_step;
    }

    // X ticks: six evenly spaced, labeled with rounded values.
    for i in 0..=5 {
        let x = x_min + (x_max - x_min) * i as f64 / 5.0;
        let xp = px(x);
        let _ = writeln!(
            svg,
            r##"<line x1="{xp:.2}" y1="{PLOT_BOTTOM}" x2="{xp:.2}" y2="{:.2}" stroke="#888888" stroke-width="1"/>"##,
            PLOT_BOTTOM + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{xp:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            PLOT_BOTTOM + 20.0,
            x.round() as i64
        );
    }
    let _ = writeln!(
        svg,
        r##"<rect x="{PLOT_LEFT}" y="{PLOT_TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="#444444" stroke-width="1"/>"##,
        PLOT_RIGHT - PLOT_LEFT,
        PLOT_BOTTOM - PLOT_TOP
    );

    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let stride = s.mean.len().div_ceil(MAX_POINTS).max(1);
        let picks: Vec<usize> = (0..s.mean.len())
            .step_by(stride)
            .chain(std::iter::once(s.mean.len() - 1))
            .collect();

        // +-1 std band as a closed polygon, clamped to the plot floor.
        let mut band = String::new();
        for &i in &picks {
            let _ = write!(band, "{:.2},{:.2} ", px(s.x[i]), py(s.mean[i] + s.std[i]));
        }
        for &i in picks.iter().rev() {
            let _ = write!(band, "{:.2},{:.2} ", px(s.x[i]), py(s.mean[i] - s.std[i]));
        }
        let _ = writeln!(
            svg,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            band.trim_end()
        );

        let mut line = String::new();
        for &i in &picks {
            let _ = write!(line, "{:.2},{:.2} ", px(s.x[i]), py(s.mean[i]));
        }
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
            line.trim_end()
        );
    }

    // Legend, top right inside the plot.
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let y = PLOT_TOP + 16.0 + idx as f64 * 18.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2.5"/>"#,
            PLOT_RIGHT - 120.0,
            PLOT_RIGHT - 92.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13">{}</text>"#,
            PLOT_RIGHT - 86.0,
            y + 4.0,
            s.label
        );
    }

    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(label: &str, value: f64, len: usize) -> FigureSeries {
        FigureSeries {
            label: label.into(),
            x: (0..len).map(|t| t as f64).collect(),
            mean: vec![value; len],
            std: vec![0.0; len],
        }
    }

    #[test]
    fn flat_series_renders_a_horizontal_line() {
        let svg = emit_figure(&[flat("k = 1", 2.0, 10)]).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains("k = 1"));
        // Zero-height band: polygon top and bottom coincide.
        let polygon = svg
            .lines()
            .find(|l| l.contains("polygon"))
            .expect("band polygon");
        let coords: Vec<&str> = polygon
            .split("points=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap()
            .split_whitespace()
            .collect();
        let ys: std::collections::BTreeSet<&str> =
            coords.iter().map(|c| c.split(',').nth(1).unwrap()).collect();
        assert_eq!(ys.len(), 1, "band should be flat, got {ys:?}");
    }

    #[test]
    fn geometric_series_is_a_straight_line_on_log_axis() {
        let series = FigureSeries {
            label: "GD".into(),
            x: (0..50).map(|t| t as f64).collect(),
            mean: (0..50).map(|t| 0.9f64.powi(t)).collect(),
            std: vec![0.0; 50],
        };
        let svg = emit_figure(&[series]).unwrap();
        let line = svg.lines().find(|l| l.contains("polyline")).unwrap();
        let pts: Vec<(f64, f64)> = line
            .split("points=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap()
            .split_whitespace()
            .map(|c| {
                let mut it = c.split(',');
                (
                    it.next().unwrap().parse().unwrap(),
                    it.next().unwrap().parse().unwrap(),
                )
            })
            .collect();
        // Collinearity of first, middle, last within pixel rounding.
        let (x0, y0) = pts[0];
        let (x1, y1) = *pts.last().unwrap();
        let (xm, ym) = pts[pts.len() / 2];
        let expected = y0 + (ym - y0) / (xm - x0) * (x1 - x0);
        assert!((expected - y1).abs() <= 0.6, "kinked line: {expected} vs {y1}");
    }

    #[test]
    fn five_labeled_series() {
        let all: Vec<FigureSeries> = ["k = 1", "k = 10", "k = 20", "k = 30", "GD"]
            .iter()
            .enumerate()
            .map(|(i, l)| flat(l, (i + 1) as f64, 8))
            .collect();
        let svg = emit_figure(&all).unwrap();
        for label in ["k = 1", "k = 10", "k = 20", "k = 30", "GD"] {
            assert!(svg.contains(label), "missing legend entry {label}");
        }
    }

    #[test]
    fn rejects_empty_input() {
        assert!(emit_figure(&[]).is_err());
        assert!(emit_figure(&[flat("x", 1.0, 0)]).is_err());
    }

    #[test]
    fn output_is_deterministic() {
        let s = vec![flat("a", 1.0, 300), flat("b", 0.5, 300)];
        assert_eq!(emit_figure(&s).unwrap(), emit_figure(&s).unwrap());
    }
}
