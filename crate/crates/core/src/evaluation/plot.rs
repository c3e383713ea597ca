use std::fmt::Write as _;
use std::path::Path;

use super::EvalError;
use crate::model::PredictiveDistribution;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;

/// SVG of experimental and predicted log10 life per sample, sorted by the
/// prediction, with the interval drawn as a shaded band.
pub fn plot_svg(y_true: &[f64], dist: &PredictiveDistribution, title: &str) -> Result<String, EvalError> {
    if dist.is_empty() {
        return Err(EvalError::Empty);
    }
    if y_true.len() != dist.len() {
        return Err(EvalError::LengthMismatch { expected: dist.len(), found: y_true.len() });
    }
    let n = dist.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dist.mean[a].total_cmp(&dist.mean[b]).then(a.cmp(&b)));

    let all = y_true.iter().chain(&dist.lower).chain(&dist.upper);
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if hi - lo < 1e-9 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let px = |i: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * if n > 1 { i as f64 / (n - 1) as f64 } else { 0.5 };
    let py = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (v - lo) / (hi - lo);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();

    let mut band = String::new();
    for (k, &i) in order.iter().enumerate() {
        write!(band, "{:.2},{:.2} ", px(k), py(dist.upper[i])).unwrap();
    }
    for (k, &i) in order.iter().enumerate().rev() {
        write!(band, "{:.2},{:.2} ", px(k), py(dist.lower[i])).unwrap();
    }
    writeln!(s, r#"<polygon points="{}" fill="green" fill-opacity="0.25" stroke="none"/>"#, band.trim_end()).unwrap();

    let mut line = String::new();
    for (k, &i) in order.iter().enumerate() {
        write!(line, "{:.2},{:.2} ", px(k), py(dist.mean[i])).unwrap();
    }
    writeln!(s, r#"<polyline points="{}" fill="none" stroke="navy" stroke-width="1.5"/>"#, line.trim_end()).unwrap();
    for (k, &i) in order.iter().enumerate() {
        writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="crimson"/>"#, px(k), py(y_true[i])).unwrap();
    }

    // Axes with min/max labels.
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    writeln!(s, r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#).unwrap();
    for v in [lo + pad, hi - pad] {
        writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{v:.2}</text>"#, x0 - 6.0, py(v) + 4.0).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">sample (sorted by prediction)</text>"#, WIDTH / 2.0, HEIGHT - 16.0).unwrap();
    writeln!(s, r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle" font-family="sans-serif" font-size="12">log10 fatigue life</text>"#, HEIGHT / 2.0, HEIGHT / 2.0).unwrap();

    let lx = WIDTH - MARGIN - 170.0;
    writeln!(s, r#"<rect x="{lx}" y="40" width="12" height="10" fill="green" fill-opacity="0.25"/><text x="{}" y="49" font-family="sans-serif" font-size="11">interval ({:.0}%)</text>"#, lx + 18.0, dist.level * 100.0).unwrap();
    writeln!(s, r#"<line x1="{lx}" y1="61" x2="{}" y2="61" stroke="navy" stroke-width="1.5"/><text x="{}" y="65" font-family="sans-serif" font-size="11">predicted</text>"#, lx + 12.0, lx + 18.0).unwrap();
    writeln!(s, r#"<circle cx="{}" cy="77" r="2.5" fill="crimson"/><text x="{}" y="81" font-family="sans-serif" font-size="11">experimental</text>"#, lx + 6.0, lx + 18.0).unwrap();
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn emit_plot(y_true: &[f64], dist: &PredictiveDistribution, path: &Path, title: &str) -> Result<(), EvalError> {
    let svg = plot_svg(y_true, dist, title)?;
    std::fs::write(path, svg).map_err(|e| EvalError::FileWrite { path: path.display().to_string(), source: e })
}
