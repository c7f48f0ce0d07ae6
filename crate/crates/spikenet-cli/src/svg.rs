//! Hand-rolled SVG figures for trial 0 (dimensions 1 and 2).
//!
//! No plotting dependency: the figures are simple enough (a line chart and
//! a heatmap) that emitting the elements directly keeps the output fully
//! deterministic — same run, same bytes.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

use spikenet::{LabelField, Network};

use crate::config::ExperimentConfig;
use crate::report::TrialRecord;

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 28.0;
const MARGIN_B: f64 = 44.0;

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Renders `figure.svg` into `dir`. One-dimensional fields get a line chart
/// (truth, network, observed points); two-dimensional fields a heatmap of
/// the network with the observed points overlaid. Higher dimensions are the
/// caller's responsibility to skip.
pub fn render_figure(
    config: &ExperimentConfig,
    field: &LabelField<f64>,
    record: &TrialRecord,
    network: &Network,
    dir: &Path,
) -> Result<()> {
    let svg = match config.d {
        1 => render_1d(field, record, network)?,
        2 => render_2d(record, network)?,
        other => anyhow::bail!("figures support d <= 2, got {other}"),
    };
    let path = dir.join("figure.svg");
    std::fs::write(&path, svg).with_context(|| format!("cannot write {}", path.display()))
}

fn render_1d(
    field: &LabelField<f64>,
    record: &TrialRecord,
    network: &Network,
) -> Result<String> {
    const SAMPLES: usize = 512;
    let mut truth_curve = Vec::with_capacity(SAMPLES + 1);
    let mut net_curve = Vec::with_capacity(SAMPLES + 1);
    for i in 0..=SAMPLES {
        let x = i as f64 / SAMPLES as f64;
        truth_curve.push((x, field.value_at(&[x])?));
        net_curve.push((x, network.evaluate(&[x])?));
    }
    let mut y_min: f64 = 0.0;
    let mut y_max: f64 = 1.0;
    for (_, y) in truth_curve.iter().chain(net_curve.iter()) {
        y_min = y_min.min(*y);
        y_max = y_max.max(*y);
    }
    let pad = 0.05 * (y_max - y_min).max(1e-9);
    y_min -= pad;
    y_max += pad;

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + x * plot_w;
    let sy = |y: f64| MARGIN_T + (y_max - y) / (y_max - y_min) * plot_h;
    let polyline = |pts: &[(f64, f64)]| {
        pts.iter()
            .map(|&(x, y)| format!("{},{}", fmt(sx(x)), fmt(sy(y))))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut out = String::new();
    push_header(&mut out, "network vs. hidden labels (trial 0)");
    push_frame(&mut out, y_min, y_max, &sy);

    let _ = writeln!(
        out,
        r##"<polyline fill="none" stroke="#4363d8" stroke-width="2" points="{}"/>"##,
        polyline(&truth_curve)
    );
    let _ = writeln!(
        out,
        r##"<polyline fill="none" stroke="#e6194b" stroke-width="1.5" stroke-dasharray="6,3" points="{}"/>"##,
        polyline(&net_curve)
    );
    for p in &record.x {
        let x = p[0];
        let truth = field.value_at(&[x])?;
        let predicted = network.evaluate(&[x])?;
        let _ = writeln!(
            out,
            r##"<circle cx="{}" cy="{}" r="4.5" fill="#4363d8" fill-opacity="0.85"/>"##,
            fmt(sx(x)),
            fmt(sy(truth))
        );
        let _ = writeln!(
            out,
            r##"<circle cx="{}" cy="{}" r="2.5" fill="#e6194b"/>"##,
            fmt(sx(x)),
            fmt(sy(predicted))
        );
    }

    // Legend.
    let lx = MARGIN_L + 12.0;
    let ly = MARGIN_T + 16.0;
    let _ = writeln!(
        out,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#4363d8" stroke-width="2"/><text x="{}" y="{}" font-size="12" fill="#222">hidden labels</text>"##,
        fmt(lx),
        fmt(ly),
        fmt(lx + 26.0),
        fmt(ly),
        fmt(lx + 32.0),
        fmt(ly + 4.0)
    );
    let _ = writeln!(
        out,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#e6194b" stroke-width="1.5" stroke-dasharray="6,3"/><text x="{}" y="{}" font-size="12" fill="#222">fitted network</text>"##,
        fmt(lx),
        fmt(ly + 18.0),
        fmt(lx + 26.0),
        fmt(ly + 18.0),
        fmt(lx + 32.0),
        fmt(ly + 22.0)
    );
    out.push_str("</svg>\n");
    Ok(out)
}

fn render_2d(record: &TrialRecord, network: &Network) -> Result<String> {
    const CELLS: usize = 64;
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let cell_w = plot_w / CELLS as f64;
    let cell_h = plot_h / CELLS as f64;

    let mut out = String::new();
    push_header(&mut out, "network heatmap with observed points (trial 0)");

    for row in 0..CELLS {
        for col in 0..CELLS {
            let x = (col as f64 + 0.5) / CELLS as f64;
            // SVG y grows downward; row 0 is the top, i.e. largest x2.
            let y = 1.0 - (row as f64 + 0.5) / CELLS as f64;
            let value = network.evaluate(&[x, y])?;
            let _ = writeln!(
                out,
                r##"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"##,
                fmt(MARGIN_L + col as f64 * cell_w),
                fmt(MARGIN_T + row as f64 * cell_h),
                fmt(cell_w + 0.5),
                fmt(cell_h + 0.5),
                heat_color(value)
            );
        }
    }
    for p in &record.x {
        let _ = writeln!(
            out,
            r##"<circle cx="{}" cy="{}" r="5" fill="#ffffff" stroke="#000000" stroke-width="1.5"/>"##,
            fmt(MARGIN_L + p[0] * plot_w),
            fmt(MARGIN_T + (1.0 - p[1]) * plot_h)
        );
    }
    let _ = writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#222" stroke-width="1"/>"##,
        fmt(MARGIN_L),
        fmt(MARGIN_T),
        fmt(plot_w),
        fmt(plot_h)
    );
    out.push_str("</svg>\n");
    Ok(out)
}

fn push_header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"##,
        WIDTH as u64, HEIGHT as u64, WIDTH as u64, HEIGHT as u64
    );
    let _ = writeln!(
        out,
        r##"<rect width="100%" height="100%" fill="#ffffff"/><text x="{}" y="18" font-size="14" font-family="sans-serif" fill="#222">{}</text>"##,
        fmt(MARGIN_L),
        title
    );
}

fn push_frame(out: &mut String, y_min: f64, y_max: f64, sy: &dyn Fn(f64) -> f64) {
    let _ = writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#222" stroke-width="1"/>"##,
        fmt(MARGIN_L),
        fmt(MARGIN_T),
        fmt(WIDTH - MARGIN_L - MARGIN_R),
        fmt(HEIGHT - MARGIN_T - MARGIN_B)
    );
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let y = y_min + frac * (y_max - y_min);
        let _ = writeln!(
            out,
            r##"<text x="{}" y="{}" font-size="11" text-anchor="end" fill="#555">{}</text>"##,
            fmt(MARGIN_L - 6.0),
            fmt(sy(y) + 4.0),
            fmt(y)
        );
        let x = MARGIN_L + frac * (WIDTH - MARGIN_L - MARGIN_R);
        let _ = writeln!(
            out,
            r##"<text x="{}" y="{}" font-size="11" text-anchor="middle" fill="#555">{}</text>"##,
            fmt(x),
            fmt(HEIGHT - MARGIN_B + 16.0),
            fmt(frac)
        );
    }
}

/// Three-stop gradient from deep violet through teal to yellow; the value is
/// clamped into [0, 1].
fn heat_color(value: f64) -> String {
    let v = value.clamp(0.0, 1.0);
    let stops = [(68u8, 1u8, 84u8), (33, 144, 140), (253, 231, 37)];
    let (lo, hi, t) = if v < 0.5 {
        (stops[0], stops[1], v * 2.0)
    } else {
        (stops[1], stops[2], (v - 0.5) * 2.0)
    };
    let mix = |a: u8, b: u8| -> u8 { (a as f64 + (b as f64 - a as f64) * t).round() as u8 };
    format!("#{:02x}{:02x}{:02x}", mix(lo.0, hi.0), mix(lo.1, hi.1), mix(lo.2, hi.2))
}
