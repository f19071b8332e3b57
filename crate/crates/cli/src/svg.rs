//! Minimal SVG 1.1 line plots.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn solid(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, dashed: false }
    }

    pub fn dashed(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, dashed: true }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| raw <= *s).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

impl Plot {
    pub fn render(&self) -> String {
        let ty = |y: f64| if self.log_y { y.log10() } else { y };
        let usable = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!self.log_y || y > 0.0);
        let pts: Vec<(f64, f64)> =
            self.series.iter().flat_map(|s| s.points.iter().copied()).filter(usable).map(|(x, y)| (x, ty(y))).collect();
        let bounds = |v: Vec<f64>| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            match (lo.is_finite(), hi > lo) {
                (false, _) => (0.0, 1.0),
                (true, false) => (lo - 0.5, lo + 0.5),
                (true, true) => (lo, hi),
            }
        };
        let (x0, x1) = bounds(pts.iter().map(|p| p.0).collect());
        let (mut y0, mut y1) = bounds(pts.iter().map(|p| p.1).collect());
        if self.log_y {
            (y0, y1) = (y0.floor(), y1.ceil());
        }
        let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let _ = writeln!(out, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);

        for x in nice_ticks(x0, x1) {
            let px = sx(x);
            let _ = writeln!(out, r#"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
            let _ = writeln!(out, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, format_tick(x));
        }
        let y_ticks = if self.log_y { (y0 as i64..=y1 as i64).map(|k| k as f64).collect() } else { nice_ticks(y0, y1) };
        for y in y_ticks {
            let py = sy(y);
            let label = if self.log_y { format!("1e{y}") } else { format_tick(y) };
            let _ = writeln!(out, r##"<line x1="{LEFT}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#dddddd"/>"##, LEFT + pw);
            let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 8.0, py + 4.0);
        }
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 15.0, escape(&self.x_label));
        let _ = writeln!(
            out,
            r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let coords: Vec<String> =
                s.points.iter().filter(|p| usable(p)).map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(ty(y)))).collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                coords.join(" ")
            );
            let ly = TOP + 18.0 + 18.0 * k as f64;
            let lx = LEFT + pw - 170.0;
            let _ = writeln!(out, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.5"{dash}/>"#, lx + 30.0);
            let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 36.0, ly + 4.0, escape(&s.label));
        }
        out.push_str("</svg>\n");
        out
    }
}

fn format_tick(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}
