//! Bare-bones SVG charts: polylines with labelled axes, and a shaded grid
//! for two-axis sweeps. The CSV files are the real output; these are for
//! looking at.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if (hi - lo).abs() < f64::EPSILON * hi.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, x: (f64, f64), y: (f64, f64), x_label: &str, y_label: &str) {
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let px = LEFT + f * pw;
        let py = TOP + ph - f * ph;
        let _ = writeln!(
            out,
            r#"<text x="{px}" y="{}" text-anchor="middle">{}</text>"#,
            TOP + ph + 15.0,
            fmt_tick(x.0 + f * (x.1 - x.0))
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LEFT - 4.0,
            py + 4.0,
            fmt_tick(y.0 + f * (y.1 - y.0))
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );
}

/// One polyline per series, sharing axes fitted to all points.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) =
        (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y1) = (0.0, 1.0, 1.0);
    }
    let (x, y) = (span(x0, x1), span(y0, y1));
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);

    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, x, y, x_label, y_label);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(px, py)| {
                format!(
                    "{:.2},{:.2}",
                    LEFT + (px - x.0) / (x.1 - x.0) * pw,
                    TOP + ph - (py - y.0) / (y.1 - y.0) * ph
                )
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = TOP + 12.0 + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            W - RIGHT + 10.0,
            W - RIGHT + 30.0,
            W - RIGHT + 35.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Shaded cells, `values[i][j]` at `(xs[i], ys[j])`. Darker is larger.
pub fn heat_map(
    title: &str,
    x_label: &str,
    y_label: &str,
    xs: &[f64],
    ys: &[f64],
    values: &[Vec<f64>],
) -> String {
    let lo = values
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = values
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let range = if hi > lo { hi - lo } else { 1.0 };
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let x = span(
        xs.first().copied().unwrap_or(0.0),
        xs.last().copied().unwrap_or(1.0),
    );
    let y = span(
        ys.first().copied().unwrap_or(0.0),
        ys.last().copied().unwrap_or(1.0),
    );

    let mut out = String::new();
    header(&mut out, title);
    let (cw, ch) = (pw / xs.len().max(1) as f64, ph / ys.len().max(1) as f64);
    for (i, row) in values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let shade = (230.0 - 200.0 * (v - lo) / range).round() as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{cw:.2}" height="{ch:.2}" fill="rgb({shade},{shade},255)"><title>{v}</title></rect>"#,
                LEFT + i as f64 * cw,
                TOP + ph - (j + 1) as f64 * ch
            );
        }
    }
    axes(&mut out, x, y, x_label, y_label);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}">min {}</text><text x="{}" y="{}">max {}</text>"#,
        W - RIGHT + 10.0,
        TOP + 12.0,
        fmt_tick(lo),
        W - RIGHT + 10.0,
        TOP + 28.0,
        fmt_tick(hi)
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_chart_has_one_polyline_per_series() {
        let s = vec![
            Series {
                label: "a<b".into(),
                points: vec![(0.0, 1.0), (1.0, 2.0)],
            },
            Series {
                label: "c".into(),
                points: vec![(0.0, 2.0), (1.0, 0.5)],
            },
        ];
        let svg = line_chart("t", "x", "y", &s);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a&lt;b"));
    }

    #[test]
    fn flat_and_empty_inputs_render() {
        let flat = vec![Series {
            label: "f".into(),
            points: vec![(1.0, 3.0), (1.0, 3.0)],
        }];
        assert!(!line_chart("t", "x", "y", &flat).contains("NaN"));
        assert!(!line_chart("t", "x", "y", &[]).contains("NaN"));
    }

    #[test]
    fn heat_map_cell_count() {
        let v = vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]];
        let svg = heat_map("t", "x", "y", &[0.0, 1.0], &[0.0, 1.0, 2.0], &v);
        assert_eq!(svg.matches("<title>").count(), 6);
        assert!(!svg.contains("NaN"));
    }
}
