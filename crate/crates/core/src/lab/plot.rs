//! Log-log SVG plots of ball mass against h.

use std::fmt::Write as _;

use super::LabError;
use crate::mass_metrics::ScalingReport;

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn px(&self, lx: f64) -> f64 {
        LEFT + (lx - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, ly: f64) -> f64 {
        H - BOTTOM - (ly - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }

    /// Segment of log10 y = a + s·log10 x over the x range, clipped to the y range.
    fn line(&self, a: f64, s: f64) -> Option<(f64, f64, f64, f64)> {
        let (mut lo, mut hi) = (self.x0, self.x1);
        if s != 0.0 {
            let (u, v) = ((self.y0 - a) / s, (self.y1 - a) / s);
            lo = lo.max(u.min(v));
            hi = hi.min(u.max(v));
        } else if !(self.y0..=self.y1).contains(&a) {
            return None;
        }
        (lo < hi).then(|| (self.px(lo), self.py(a + s * lo), self.px(hi), self.py(a + s * hi)))
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// Mass against h on log-log axes: one colour per report, with the envelope
/// fit (solid) and the reference slope-δ line through the envelope constant
/// (dashed). The legend prints the fitted slope to three decimals.
pub fn plot(reports: &[ScalingReport]) -> Result<String, LabError> {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .flat_map(|r| r.samples.iter())
        .filter(|s| s.h > 0.0 && s.mass > 0.0)
        .map(|s| (s.h.log10(), s.mass.log10()))
        .collect();
    if pts.is_empty() {
        return Err(LabError::EmptyReport);
    }
    let fold = |f: fn(&(f64, f64)) -> f64| {
        pts.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
    };
    let (x0, x1) = padded(fold(|p| p.0).0, fold(|p| p.0).1);
    let (y0, y1) = padded(fold(|p| p.1).0, fold(|p| p.1).1);
    let ax = Axes { x0, x1, y0, y1 };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (bx, by) = (ax.px(x0), ax.py(y1));
    let (bw, bh) = (ax.px(x1) - bx, ax.py(y0) - by);
    let _ = writeln!(s, r#"<rect x="{bx:.2}" y="{by:.2}" width="{bw:.2}" height="{bh:.2}" fill="none" stroke="black"/>"#);
    for d in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let x = ax.px(d as f64);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, by + bh, by + bh + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"#, by + bh + 18.0);
    }
    for d in (y0.ceil() as i32)..=(y1.floor() as i32) {
        let y = ax.py(d as f64);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{bx:.2}" y2="{y:.2}" stroke="black"/>"#, bx - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#, bx - 8.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">h</text>"#, bx + bw / 2.0, H - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">mass in B(p0, h^δ)</text>"#,
        by + bh / 2.0,
        by + bh / 2.0
    );

    for (i, r) in reports.iter().enumerate() {
        let c = COLORS[i % COLORS.len()];
        for p in r.samples.iter().filter(|s| s.h > 0.0 && s.mass > 0.0) {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{c}"/>"#, ax.px(p.h.log10()), ax.py(p.mass.log10()));
        }
        let slope = r.fit.slope;
        if slope.is_finite() && r.fit.intercept.is_finite() {
            // ln m = intercept + slope·ln h
            if let Some((a, b, c2, d)) = ax.line(r.fit.intercept / std::f64::consts::LN_10, slope) {
                let _ = writeln!(s, r#"<line x1="{a:.2}" y1="{b:.2}" x2="{c2:.2}" y2="{d:.2}" stroke="{c}" stroke-width="1.5"/>"#);
            }
        }
        if r.envelope_constant > 0.0 {
            if let Some((a, b, c2, d)) = ax.line(r.envelope_constant.log10(), r.delta) {
                let _ = writeln!(
                    s,
                    r#"<line x1="{a:.2}" y1="{b:.2}" x2="{c2:.2}" y2="{d:.2}" stroke="{c}" stroke-dasharray="6 4"/>"#
                );
            }
        }
        let ly = TOP + 16.0 + 34.0 * i as f64;
        let lx = W - RIGHT + 12.0;
        let _ = writeln!(s, r#"<text x="{lx:.2}" y="{ly:.2}" fill="{c}">δ = {}</text>"#, r.delta);
        let _ = writeln!(s, r#"<text x="{lx:.2}" y="{:.2}" fill="{c}">slope {slope:.3}</text>"#, ly + 15.0);
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

/// Reads reports from JSON files, each holding one report or a list of them.
pub fn read_reports(paths: &[std::path::PathBuf]) -> Result<Vec<ScalingReport>, LabError> {
    let mut out = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(p)?;
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| LabError::BadReport(format!("{}: {e}", p.display())))?;
        let parsed = if v.is_array() {
            serde_json::from_value::<Vec<ScalingReport>>(v)
        } else {
            serde_json::from_value::<ScalingReport>(v).map(|r| vec![r])
        };
        out.extend(parsed.map_err(|e| LabError::BadReport(format!("{}: {e}", p.display())))?);
    }
    Ok(out)
}
