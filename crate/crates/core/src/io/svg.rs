//! Minimal SVG line plots.

use std::fmt::Write as _;

const W: f64 = 800.0;
const H: f64 = 500.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 50.0); // left, right, top, bottom
const COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn finite_range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        return None;
    }
    Some(if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) })
}

/// Plots each named series against `x`. Non-finite points break the line.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, x: &[f64], series: &[(&str, &[f64])]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
    let (l, r, t, b) = MARGIN;
    let (pw, ph) = (W - l - r, H - t - b);
    let xr = finite_range(x.iter().copied());
    let yr = finite_range(series.iter().flat_map(|(_, y)| y.iter().copied()));
    let (Some((x0, x1)), Some((y0, y1))) = (xr, yr) else {
        s.push_str("</svg>\n");
        return s;
    };
    let y1 = y1 + 0.05 * (y1 - y0);
    let px = |v: f64| l + (v - x0) / (x1 - x0) * pw;
    let py = |v: f64| t + ph - (v - y0) / (y1 - y0) * ph;
    let _ = writeln!(s, r##"<rect x="{l}" y="{t}" width="{pw}" height="{ph}" fill="none" stroke="#000000"/>"##);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, px(xv), t + ph + 16.0, tick(xv));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, l - 6.0, py(yv) + 4.0, tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, l + pw / 2.0, H - 10.0, escape(x_label));
    let _ =
        writeln!(s, r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#, t + ph / 2.0, t + ph / 2.0, escape(y_label));
    for (k, (name, y)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut runs: Vec<Vec<String>> = vec![Vec::new()];
        for (xv, yv) in x.iter().zip(y.iter()) {
            if xv.is_finite() && yv.is_finite() {
                runs.last_mut().expect("nonempty").push(format!("{:.2},{:.2}", px(*xv), py(*yv)));
            } else if !runs.last().expect("nonempty").is_empty() {
                runs.push(Vec::new());
            }
        }
        for run in runs.iter().filter(|r| !r.is_empty()) {
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, run.join(" "));
        }
        let ly = t + 16.0 + 16.0 * k as f64;
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#, l + pw - 150.0, l + pw - 130.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, l + pw - 124.0, ly + 4.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e5) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}
