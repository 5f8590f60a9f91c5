//! CSV tables and self-contained SVG plots.

use std::fmt::Write as _;

/// Formats a float so that parsing it back gives the same value.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:?}")
    }
}

/// CSV with a single header line.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| fmt_f64(*v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Frame {
        let mut f = Frame {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for (x, y) in points.filter(|p| p.0.is_finite() && p.1.is_finite()) {
            f.x0 = f.x0.min(x);
            f.x1 = f.x1.max(x);
            f.y0 = f.y0.min(y);
            f.y1 = f.y1.max(y);
        }
        if !f.x0.is_finite() {
            f = Frame { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };
        }
        if f.x1 <= f.x0 {
            f.x1 = f.x0 + 1.0;
        }
        if f.y1 <= f.y0 {
            f.y1 = f.y0 + 1.0;
        }
        f
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }
}

fn header(s: &mut String, title: &str, xlabel: &str, ylabel: &str, f: &Frame) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(title));
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, esc(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(ylabel)
    );
    for (v, anchor, x, y) in [
        (f.x0, "start", PAD, H - PAD + 16.0),
        (f.x1, "end", W - PAD, H - PAD + 16.0),
    ] {
        let _ = writeln!(s, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{}</text>"#, short(v));
    }
    for (v, y) in [(f.y0, H - PAD), (f.y1, PAD + 10.0)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#, PAD - 4.0, short(v));
    }
}

fn short(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Line plot of several series; `markers` draws points instead of lines.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series], markers: bool) -> String {
    let f = Frame::fit(series.iter().flat_map(|s| s.points.iter().copied()));
    let mut s = String::new();
    header(&mut s, title, xlabel, ylabel, &f);
    for (k, ser) in series.iter().enumerate() {
        let col = COLORS[k % COLORS.len()];
        let pts: Vec<(f64, f64)> = ser
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| (f.px(x), f.py(y)))
            .collect();
        if markers {
            for (x, y) in &pts {
                let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{col}"/>"#);
            }
        } else {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{col}" stroke-width="1.2"/>"#,
                path.join(" ")
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{col}">{}</text>"#,
            W - PAD + 4.0 - 120.0,
            PAD + 16.0 + 14.0 * k as f64,
            esc(ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Bar chart of histogram counts.
pub fn histogram_plot(title: &str, edges: &[f64], counts: &[u64]) -> String {
    let top = counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let f = Frame {
        x0: edges[0],
        x1: *edges.last().unwrap(),
        y0: 0.0,
        y1: top,
    };
    let mut s = String::new();
    header(&mut s, title, "M", "count", &f);
    for (k, c) in counts.iter().enumerate() {
        let (x0, x1) = (f.px(edges[k]), f.px(edges[k + 1]));
        let y = f.py(*c as f64);
        let _ = writeln!(
            s,
            r##"<rect x="{x0:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="#1f77b4" stroke="white"/>"##,
            x1 - x0,
            f.py(0.0) - y
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Adds a vertical marker line at `x` to a plot produced by [`line_plot`]
/// over the same data.
pub fn with_vertical_marker(svg: &str, series: &[Series], x: f64, label: &str) -> String {
    let f = Frame::fit(series.iter().flat_map(|s| s.points.iter().copied()));
    let px = f.px(x);
    let mark = format!(
        "<line x1=\"{px:.1}\" y1=\"{PAD}\" x2=\"{px:.1}\" y2=\"{}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n<text x=\"{px:.1}\" y=\"{}\" text-anchor=\"middle\" fill=\"gray\">{}</text>\n</svg>\n",
        H - PAD,
        PAD - 4.0,
        esc(label)
    );
    svg.trim_end().trim_end_matches("</svg>").to_string() + &mark
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_float_format() {
        for v in [0.1, 1.0 / 3.0, -2.5e-17, 1e300, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        let t = csv_table(&["a", "b"], &[vec![1.0, 0.5]]);
        assert_eq!(t, "a,b\n1.0,0.5\n");
    }

    #[test]
    fn svg_is_well_formed() {
        let s = line_plot("t", "x", "y", &[Series { label: "a<b", points: vec![(0.0, 1.0), (1.0, 2.0)] }], false);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a&lt;b"));
    }
}
