//! Minimal SVG charts. Coordinates are printed with two decimals, so output
//! is byte-stable for identical data.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    log_x: bool,
}

impl Frame {
    fn fit(series: &[Series], log_x: bool) -> Self {
        let tx = |x: f64| if log_x { x.log10() } else { x };
        let pts = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            if log_x && x <= 0.0 {
                continue;
            }
            x0 = x0.min(tx(x));
            x1 = x1.max(tx(x));
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 <= 0.0 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 <= 0.0 {
            y1 = y0 + 1.0;
        }
        let pad = 0.05 * (y1 - y0);
        Self { x: (x0, x1), y: (y0 - pad, y1 + pad), log_x }
    }

    fn px(&self, x: f64) -> f64 {
        let x = if self.log_x { x.log10() } else { x };
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, y0, x1, y1) = (LEFT, H - BOTTOM, W - RIGHT, TOP);
    let _ = writeln!(out, r#"<path d="M{x0:.2} {y1:.2} L{x0:.2} {y0:.2} L{x1:.2} {y0:.2}" stroke="black" fill="none"/>"#);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let xl = if f.log_x { 10f64.powf(xv) } else { xv };
        let px = LEFT + t * (W - LEFT - RIGHT);
        let py = H - BOTTOM - t * (H - TOP - BOTTOM);
        let _ = writeln!(out, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y0 + 16.0, tick(xl));
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 6.0, py + 4.0, tick(yv));
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 12.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e4).contains(&a) {
        format!("{v:.1e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 8.0 + 16.0 * i as f64;
        let x = W - RIGHT - 150.0;
        let _ = writeln!(out, r#"<rect x="{x:.2}" y="{:.2}" width="10" height="10" fill="{}"/>"#, y - 9.0, PALETTE[i % PALETTE.len()]);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{y:.2}">{}</text>"#, x + 14.0, escape(name));
    }
}

pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], log_x: bool) -> String {
    let f = Frame::fit(series, log_x);
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &f, x_label, y_label);
    for (i, s) in series.iter().enumerate() {
        let mut d = String::new();
        for &(x, y) in s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite() && (!log_x || p.0 > 0.0)) {
            let _ = write!(d, "{}{:.2} {:.2}", if d.is_empty() { "M" } else { " L" }, f.px(x), f.py(y));
        }
        let _ = writeln!(out, r#"<path d="{d}" stroke="{}" stroke-width="1.2" fill="none"/>"#, PALETTE[i % PALETTE.len()]);
    }
    if series.len() > 1 {
        legend(&mut out, &series.iter().map(|s| s.name).collect::<Vec<_>>());
    }
    out.push_str("</svg>\n");
    out
}

pub fn scatter(title: &str, x_label: &str, y_label: &str, groups: &[Series]) -> String {
    let f = Frame::fit(groups, false);
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &f, x_label, y_label);
    for (i, g) in groups.iter().enumerate() {
        for &(x, y) in &g.points {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.7"/>"#,
                f.px(x),
                f.py(y),
                PALETTE[i % PALETTE.len()]
            );
        }
    }
    legend(&mut out, &groups.iter().map(|s| s.name).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// Count matrix as a shaded grid, rows top to bottom.
pub fn heatmap(title: &str, rows: &[&str], cols: &[&str], values: &[Vec<f64>]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let max = values.iter().flatten().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let cell = ((W - 220.0) / cols.len() as f64).min((H - 120.0) / rows.len() as f64);
    let (ox, oy) = (160.0, 60.0);
    for (c, name) in cols.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            ox + cell * (c as f64 + 0.5),
            oy - 8.0,
            escape(name)
        );
    }
    for (r, name) in rows.iter().enumerate() {
        let y = oy + cell * r as f64;
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, ox - 8.0, y + cell / 2.0 + 4.0, escape(name));
        for (c, v) in values[r].iter().enumerate() {
            let x = ox + cell * c as f64;
            let shade = 255.0 - 200.0 * v / max;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{cell:.2}" height="{cell:.2}" fill="rgb({s},{s},255)" stroke="white"/>"#,
                s = shade.round() as u8
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                x + cell / 2.0,
                y + cell / 2.0 + 4.0,
                tick(*v)
            );
        }
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">predicted</text>"#, ox + cell * cols.len() as f64 / 2.0, oy - 26.0);
    out.push_str("</svg>\n");
    out
}
