//! Minimal hand-written SVG charts.

use std::fmt::Write as _;

use super::stats::{quantile, summarize};
use super::sweep::SweepReport;
use crate::trainer::TrainingCurve;
use crate::{Error, Result};

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{title}</text>"#,
        W / 2.0
    );
}

fn axes(out: &mut String, x_label: &str, y_label: &str) {
    let (x0, y0, x1, y1) = (LEFT, H - BOTTOM, W - RIGHT, TOP);
    let _ = writeln!(
        out,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        (x0 + x1) / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{y_label}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
}

fn nice_max(v: f64) -> f64 {
    if !(v > 0.0) {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    for m in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if m * mag >= v {
            return m * mag;
        }
    }
    10.0 * mag
}

/// Gaussian kernel density on `grid`, Silverman bandwidth.
fn density(sorted: &[f64], grid: &[f64]) -> Vec<f64> {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let sd = (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n.max(2.0)).sqrt();
    let iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let bw = (0.9 * spread * n.powf(-0.2)).max(1e-3);
    grid.iter()
        .map(|&g| sorted.iter().map(|&v| (-0.5 * ((g - v) / bw).powi(2)).exp()).sum::<f64>())
        .collect()
}

/// Violin plot with an inner box (quartiles, median) of the position error
/// per noise level.
pub fn violin_svg(report: &SweepReport) -> Result<String> {
    let mut levels: Vec<f64> = report.rows.iter().map(|r| r.sigma).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if levels.is_empty() {
        return Err(Error::invalid("sweep report has no rows"));
    }
    let groups: Vec<Vec<f64>> = levels
        .iter()
        .map(|&s| {
            let mut e: Vec<f64> = report
                .rows
                .iter()
                .filter(|r| r.sigma == s && r.is_ok())
                .map(|r| r.error_m)
                .collect();
            e.sort_by(f64::total_cmp);
            e
        })
        .collect();
    let y_max = nice_max(groups.iter().flatten().copied().fold(0.0, f64::max));
    let plot_h = H - BOTTOM - TOP;
    let y_of = |v: f64| H - BOTTOM - v / y_max * plot_h;
    let slot = (W - LEFT - RIGHT) / levels.len() as f64;

    let mut out = String::new();
    header(&mut out, "Localization error by noise level");
    for k in 0..=5 {
        let v = y_max * k as f64 / 5.0;
        let y = y_of(v);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{v}</text>"##,
            W - RIGHT,
            LEFT - 6.0,
            y + 4.0
        );
    }
    axes(&mut out, "noise standard deviation", "position error [m]");

    for (i, (sigma, errs)) in levels.iter().zip(&groups).enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let _ = writeln!(
            out,
            r#"<text x="{cx:.2}" y="{}" text-anchor="middle">{sigma}</text>"#,
            H - BOTTOM + 18.0
        );
        if errs.is_empty() {
            continue;
        }
        let grid: Vec<f64> = (0..=60).map(|k| errs[0] + (errs[errs.len() - 1] - errs[0]) * k as f64 / 60.0).collect();
        let dens = density(errs, &grid);
        let peak = dens.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let half = 0.4 * slot;
        let mut path = String::new();
        for (g, d) in grid.iter().zip(&dens) {
            let _ = write!(path, "{}{:.2},{:.2} ", if path.is_empty() { "M" } else { "L" }, cx + d / peak * half, y_of(*g));
        }
        for (g, d) in grid.iter().zip(&dens).rev() {
            let _ = write!(path, "L{:.2},{:.2} ", cx - d / peak * half, y_of(*g));
        }
        let _ = writeln!(out, r##"<path d="{path}Z" fill="#9ecae1" stroke="#3182bd"/>"##);
        let s = summarize(*sigma, errs, 0);
        let bw = 0.08 * slot;
        let _ = writeln!(
            out,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
            y_of(s.min),
            y_of(s.max)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="white" stroke="black"/>"#,
            cx - bw,
            y_of(s.q3),
            2.0 * bw,
            (y_of(s.q1) - y_of(s.q3)).max(0.5)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="2"/>"#,
            cx - bw,
            y_of(s.median),
            cx + bw,
            y_of(s.median)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Training H1 loss and test MSE per epoch on a log scale.
pub fn curve_svg(curve: &TrainingCurve) -> Result<String> {
    let recs = &curve.records;
    if recs.is_empty() {
        return Err(Error::invalid("training curve is empty"));
    }
    let all = recs.iter().flat_map(|r| [r.train_h1_loss, r.test_mse]).filter(|v| *v > 0.0 && v.is_finite());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return Err(Error::invalid("training curve has no positive values"));
    }
    let (d_lo, d_hi) = (lo.log10().floor(), hi.log10().ceil().max(lo.log10().floor() + 1.0));
    let plot_h = H - BOTTOM - TOP;
    let plot_w = W - LEFT - RIGHT;
    let last = recs[recs.len() - 1].epoch.max(1) as f64;
    let x_of = |e: usize| LEFT + e as f64 / last * plot_w;
    let y_of = |v: f64| H - BOTTOM - (v.log10() - d_lo) / (d_hi - d_lo) * plot_h;

    let mut out = String::new();
    header(&mut out, "Training curve");
    let mut d = d_lo;
    while d <= d_hi {
        let y = y_of(10f64.powf(d));
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            W - RIGHT,
            LEFT - 6.0,
            y + 4.0
        );
        d += 1.0;
    }
    axes(&mut out, "epoch", "loss");
    let _ = writeln!(out, r#"<text x="{LEFT}" y="{}" text-anchor="start">{}</text>"#, H - BOTTOM + 18.0, 0);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        W - RIGHT,
        H - BOTTOM + 18.0,
        last
    );
    for (name, color, pick) in [
        ("train H1 loss", "#d62728", (|r: &crate::trainer::CurveRecord| r.train_h1_loss) as fn(&_) -> f64),
        ("test MSE", "#1f77b4", |r| r.test_mse),
    ] {
        let pts: Vec<String> = recs
            .iter()
            .filter(|r| pick(r) > 0.0 && pick(r).is_finite())
            .map(|r| format!("{:.2},{:.2}", x_of(r.epoch), y_of(pick(r))))
            .collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, pts.join(" "));
        let ly = if name.starts_with("train") { TOP + 10.0 } else { TOP + 26.0 };
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}"/><text x="{}" y="{}">{name}</text>"#,
            W - RIGHT - 140.0,
            W - RIGHT - 115.0,
            W - RIGHT - 110.0,
            ly + 4.0
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
