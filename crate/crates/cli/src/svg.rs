//! Minimal dependency-free SVG line plots.

use std::fmt::Write as _;

pub struct Curve<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
    pub dashed: bool,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// "Nice" tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-300);
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= target as f64).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render curves sharing the abscissa `x`. `stamp` lines are embedded in a
/// leading `<!-- parameters ... -->` comment so every file records how it was
/// produced.
pub fn line_plot(title: &str, stamp: &[String], x_label: &str, y_label: &str, x: &[f64], curves: &[Curve<'_>]) -> String {
    let (x_lo, x_hi) = (x.first().copied().unwrap_or(0.0), x.last().copied().unwrap_or(1.0));
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for c in curves {
        for &v in c.values.iter().filter(|v| v.is_finite()) {
            y_lo = y_lo.min(v);
            y_hi = y_hi.max(v);
        }
    }
    if !y_lo.is_finite() {
        (y_lo, y_hi) = (-1.0, 1.0);
    }
    let pad = 0.05 * (y_hi - y_lo).max(1e-12);
    let (y_lo, y_hi) = (y_lo - pad, y_hi + pad);
    let x_span = (x_hi - x_lo).max(1e-300);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |v: f64| LEFT + (v - x_lo) / x_span * plot_w;
    let py = |v: f64| TOP + (y_hi - v) / (y_hi - y_lo) * plot_h;

    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(out, "<!-- parameters");
    for line in stamp {
        let _ = writeln!(out, "  {}", line.replace("--", "- -"));
    }
    let _ = writeln!(out, "-->");
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for t in ticks(x_lo, x_hi, 8) {
        let xp = px(t);
        let _ = writeln!(
            out,
            r#"<line x1="{xp:.2}" y1="{:.2}" x2="{xp:.2}" y2="{:.2}" stroke="black"/><text x="{xp:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 20.0,
            fmt_tick(t)
        );
    }
    for t in ticks(y_lo, y_hi, 6) {
        let yp = py(t);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{yp:.2}" x2="{LEFT}" y2="{yp:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            yp + 4.0,
            fmt_tick(t)
        );
    }
    if y_lo < 0.0 && y_hi > 0.0 {
        let y0 = py(0.0);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="#999" stroke-width="0.5"/>"##,
            LEFT + plot_w
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.1}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(y_label)
    );
    for (k, c) in curves.iter().enumerate() {
        let mut pts = String::new();
        for (&xv, &yv) in x.iter().zip(c.values) {
            if yv.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", px(xv), py(yv));
            }
        }
        let dash = if c.dashed { r#" stroke-dasharray="6,4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="black" stroke-width="1.5"{dash} points="{}"/>"#,
            pts.trim_end()
        );
        let ly = TOP + 18.0 + 18.0 * k as f64;
        let lx = LEFT + plot_w - 150.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="black" stroke-width="1.5"{dash}/><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 30.0,
            lx + 36.0,
            ly + 4.0,
            escape(c.label)
        );
    }
    out.push_str("</svg>\n");
    out
}
