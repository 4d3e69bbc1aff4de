//! Minimal deterministic SVG output: line plots and heatmaps.
//!
//! Coordinates are printed with fixed precision so identical inputs give
//! byte-identical files.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

// viridis, sampled at five points
const CMAP: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

fn color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let s = t * (CMAP.len() - 1) as f64;
    let i = (s.floor() as usize).min(CMAP.len() - 2);
    let f = s - i as f64;
    let (a, b) = (CMAP[i], CMAP[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn finite_range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 0.0 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.5 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn header(out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        MARGIN_L + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 12.0,
        escape(xlabel)
    );
    let cy = MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B) / 2.0;
    let _ = writeln!(
        out,
        r#"<text x="18" y="{cy:.2}" text-anchor="middle" transform="rotate(-90 18 {cy:.2})">{}</text>"#,
        escape(ylabel)
    );
}

fn axes(out: &mut String, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) {
    let (pw, ph) = (WIDTH - MARGIN_L - MARGIN_R, HEIGHT - MARGIN_T - MARGIN_B);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let px = MARGIN_L + t * pw;
        let py = MARGIN_T + ph - t * ph;
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_T + ph + 16.0,
            tick(x0 + t * (x1 - x0))
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_L - 6.0,
            py + 4.0,
            tick(y0 + t * (y1 - y0))
        );
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// One polyline per series over the shared abscissa `x`.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, x: &[f64], series: &[(String, Vec<f64>)]) -> String {
    let mut out = String::new();
    header(&mut out, title, xlabel, ylabel);
    let xr = finite_range(x.iter().copied());
    let yr = finite_range(series.iter().flat_map(|(_, v)| v.iter().copied()));
    axes(&mut out, xr, yr);
    let (pw, ph) = (WIDTH - MARGIN_L - MARGIN_R, HEIGHT - MARGIN_T - MARGIN_B);
    for (k, (label, ys)) in series.iter().enumerate() {
        let c = PALETTE[k % PALETTE.len()];
        let mut pts = String::new();
        for (xi, yi) in x.iter().zip(ys).filter(|(a, b)| a.is_finite() && b.is_finite()) {
            let px = MARGIN_L + (xi - xr.0) / (xr.1 - xr.0) * pw;
            let py = MARGIN_T + ph - (yi - yr.0) / (yr.1 - yr.0) * ph;
            let _ = write!(pts, "{px:.2},{py:.2} ");
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{}"/>"#,
            pts.trim_end()
        );
        let ly = MARGIN_T + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - MARGIN_R + 10.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{c}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 24.0,
            ly + 4.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Heatmap of `z`, row-major with `y.len()` rows and `x.len()` columns;
/// row 0 is drawn at the bottom.
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, x: &[f64], y: &[f64], z: &[f64]) -> String {
    assert_eq!(
        z.len(),
        x.len() * y.len(),
        "heatmap: z must have x.len() * y.len() entries"
    );
    let mut out = String::new();
    header(&mut out, title, xlabel, ylabel);
    let xr = finite_range(x.iter().copied());
    let yr = finite_range(y.iter().copied());
    let (zlo, zhi) = finite_range(z.iter().copied());
    let (pw, ph) = (WIDTH - MARGIN_L - MARGIN_R, HEIGHT - MARGIN_T - MARGIN_B);
    let (cw, ch) = (pw / x.len().max(1) as f64, ph / y.len().max(1) as f64);
    for r in 0..y.len() {
        for c in 0..x.len() {
            let v = z[r * x.len() + c];
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                MARGIN_L + c as f64 * cw,
                MARGIN_T + ph - (r + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                color((v - zlo) / (zhi - zlo))
            );
        }
    }
    axes(&mut out, xr, yr);
    let lx = WIDTH - MARGIN_R + 20.0;
    for i in 0..20 {
        let t = i as f64 / 19.0;
        let _ = writeln!(
            out,
            r#"<rect x="{lx:.2}" y="{:.2}" width="16" height="{:.2}" fill="{}"/>"#,
            MARGIN_T + ph - (i + 1) as f64 * ph / 20.0,
            ph / 20.0 + 0.05,
            color(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
        lx + 22.0,
        MARGIN_T + ph,
        tick(zlo)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
        lx + 22.0,
        MARGIN_T + 10.0,
        tick(zhi)
    );
    out.push_str("</svg>\n");
    out
}
