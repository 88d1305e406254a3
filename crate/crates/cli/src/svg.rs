//! Minimal SVG 1.1 line plots: stacked panels of polylines.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const PANEL_H: f64 = 240.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f",
];

pub struct Line {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub lines: Vec<Line>,
}

fn bounds<'a>(vals: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.5 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn panel(out: &mut String, p: &Panel, top: f64) {
    let (x0, x1) = bounds(p.lines.iter().flat_map(|l| l.xs.iter()));
    let (y0, y1) = bounds(p.lines.iter().flat_map(|l| l.ys.iter()));
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = PANEL_H - 2.0 * MARGIN;
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| top + MARGIN + (y1 - y) / (y1 - y0) * plot_h;

    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN}" y="{}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##,
        top + MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        top + MARGIN - 16.0,
        escape(&p.title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        top + PANEL_H - 12.0,
        escape(&p.x_label)
    );
    for (v, anchor, x, y) in [
        (x0, "start", MARGIN, top + PANEL_H - MARGIN + 14.0),
        (x1, "end", WIDTH - MARGIN, top + PANEL_H - MARGIN + 14.0),
    ] {
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{y}" font-size="10" text-anchor="{anchor}">{v:.4}</text>"#
        );
    }
    for (v, y) in [(y1, top + MARGIN + 4.0), (y0, top + PANEL_H - MARGIN)] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{y}" font-size="10" text-anchor="end">{v:.3e}</text>"#,
            MARGIN - 4.0
        );
    }
    for (i, line) in p.lines.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut pts = String::new();
        for (&x, &y) in line.xs.iter().zip(&line.ys) {
            if x.is_finite() && y.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(y));
            }
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
            pts.trim_end()
        );
        if p.lines.len() <= COLORS.len() {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="10" fill="{color}">{}</text>"#,
                WIDTH - MARGIN + 4.0,
                top + MARGIN + 12.0 * (i as f64 + 1.0),
                escape(&line.label)
            );
        }
    }
}

pub fn render(panels: &[Panel]) -> String {
    let height = PANEL_H * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{height}" viewBox="0 0 {} {height}">"#,
        WIDTH + 80.0,
        WIDTH + 80.0
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        panel(&mut out, p, i as f64 * PANEL_H);
    }
    out.push_str("</svg>\n");
    out
}
