//! Static figures: SVG line plots of the time series and PNG heatmaps of
//! snapshots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use efk_core::{Field, RunRecord};
use image::{Rgb, RgbImage};

use crate::error::{HarnessError, Result};
use crate::output::write_text;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
/// Longest polyline drawn; longer series are subsampled evenly.
const MAX_POINTS: usize = 2000;

/// One curve of a line plot.
pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn subsample(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(MAX_POINTS);
    let mut out: Vec<_> = points.iter().step_by(stride).copied().collect();
    if out.last() != points.last() {
        out.push(*points.last().unwrap());
    }
    out
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Renders curves sharing one pair of axes as an SVG document.
pub fn line_plot_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts: Vec<Vec<(f64, f64)>> = series.iter().map(|s| subsample(&s.points)).collect();
    let (x0, x1) = padded_range(pts.iter().flatten().map(|p| p.0));
    let (y0, y1) = padded_range(pts.iter().flatten().map(|p| p.1));
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN,
            HEIGHT - MARGIN + 5.0,
            HEIGHT - MARGIN + 20.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN - 5.0,
            MARGIN - 8.0,
            py + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        MARGIN / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (k, (ser, p)) in series.iter().zip(&pts).enumerate() {
        let color = COLORS[k % COLORS.len()];
        if p.len() == 1 {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(p[0].0), sy(p[0].1));
        } else {
            let coords: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        let ly = MARGIN + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            WIDTH - MARGIN - 110.0,
            WIDTH - MARGIN - 90.0,
            WIDTH - MARGIN - 85.0,
            ly + 4.0,
            escape(ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Diverging blue-white-red map of `[-1, 1]`, clamped outside.
fn colormap(v: f64) -> Rgb<u8> {
    let t = v.clamp(-1.0, 1.0);
    let fade = |a: f64| (255.0 * (1.0 - a)).round() as u8;
    if t >= 0.0 {
        Rgb([255, fade(t), fade(t)])
    } else {
        Rgb([fade(-t), fade(-t), 255])
    }
}

/// Heatmap with x to the right and y upward, one pixel block per node.
pub fn heatmap(field: &Field) -> RgbImage {
    let (n_x, n_y) = field.shape();
    let scale = (512 / n_x.max(n_y)).max(1) as u32;
    let m = field.values();
    RgbImage::from_fn(n_x as u32 * scale, n_y as u32 * scale, |px, py| {
        let i = (px / scale) as usize;
        let j = n_y - 1 - (py / scale) as usize;
        colormap(m[(i, j)])
    })
}

/// Named groups of records, e.g. one per scheme.
pub struct RecordSet<'a> {
    pub label: &'a str,
    pub records: &'a [RunRecord],
}

/// Writes `max_norm.svg`, `energy.svg`, `rank.svg` and one
/// `snapshot_t<time>.png` per snapshot. Returns the files written.
pub fn emit_plots(sets: &[RecordSet], snapshots: &[(f64, &Field)], dir: &Path) -> Result<Vec<PathBuf>> {
    if sets.is_empty() || sets.iter().any(|s| s.records.is_empty()) {
        return Err(HarnessError::Output("no records to plot".into()));
    }
    let curves = |f: fn(&RunRecord) -> f64| -> Vec<Series> {
        sets.iter()
            .map(|s| Series { label: s.label, points: s.records.iter().map(|r| (r.time, f(r))).collect() })
            .collect()
    };
    type Column = fn(&RunRecord) -> f64;
    let plots: [(&str, &str, Column); 3] = [
        ("max_norm", "maximum norm", |r| r.max_norm),
        ("energy", "energy", |r| r.energy),
        ("rank", "rank", |r| r.rank as f64),
    ];
    let mut written = Vec::new();
    for (name, y_label, f) in plots {
        let path = dir.join(format!("{name}.svg"));
        write_text(&path, &line_plot_svg(y_label, "t", y_label, &curves(f)))?;
        written.push(path);
    }
    for (t, field) in snapshots {
        let path = dir.join(format!("snapshot_t{t:.6}.png"));
        heatmap(field)
            .save(&path)
            .map_err(|e| HarnessError::io(&path, std::io::Error::other(e)))?;
        written.push(path);
    }
    Ok(written)
}
