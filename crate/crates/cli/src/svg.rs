//! Minimal SVG emission for planar plots: polylines, geodesic arcs and
//! labelled axes over a linear viewport.

use std::fmt::Write;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

pub fn color(k: usize) -> &'static str {
    PALETTE[k % PALETTE.len()]
}

/// Linear map from a data window to a pixel panel.
#[derive(Clone, Copy, Debug)]
pub struct Viewport {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub width: f64,
    pub height: f64,
    /// Horizontal offset of the panel inside the document.
    pub left: f64,
}

const MARGIN: f64 = 48.0;

impl Viewport {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64, width: f64, height: f64) -> Self {
        Self { x0, x1, y0, y1, width, height, left: 0.0 }
    }

    fn px(&self, x: f64) -> f64 {
        self.left + MARGIN + (x - self.x0) / (self.x1 - self.x0) * (self.width - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        self.height - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (self.height - 2.0 * MARGIN)
    }

    fn scale_x(&self) -> f64 {
        (self.width - 2.0 * MARGIN) / (self.x1 - self.x0)
    }

    fn scale_y(&self) -> f64 {
        (self.height - 2.0 * MARGIN) / (self.y1 - self.y0)
    }
}

/// One panel of a figure.
pub struct Panel {
    view: Viewport,
    body: String,
    title: String,
    labels: (String, String),
}

impl Panel {
    pub fn new(view: Viewport, title: &str, xlabel: &str, ylabel: &str) -> Self {
        Self { view, body: String::new(), title: title.into(), labels: (xlabel.into(), ylabel.into()) }
    }

    pub fn polyline(&mut self, pts: impl IntoIterator<Item = (f64, f64)>, stroke: &str) {
        let mut d = String::new();
        for (x, y) in pts {
            if !x.is_finite() || !y.is_finite() {
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2}", if d.is_empty() { "M" } else { " L" }, self.view.px(x), self.view.py(y));
        }
        if !d.is_empty() {
            let _ = writeln!(self.body, r#"<path d="{d}" fill="none" stroke="{stroke}" stroke-width="1.2"/>"#);
        }
    }

    /// Upper semicircle of the given center and radius.
    pub fn semicircle(&mut self, center: f64, radius: f64, stroke: &str) {
        let v = &self.view;
        let (ax, ay) = (v.px(center - radius), v.py(0.0));
        let (bx, by) = (v.px(center + radius), v.py(0.0));
        let (rx, ry) = (radius * v.scale_x(), radius * v.scale_y());
        let _ = writeln!(
            self.body,
            r#"<path d="M{ax:.2},{ay:.2} A{rx:.2},{ry:.2} 0 0 1 {bx:.2},{by:.2}" fill="none" stroke="{stroke}" stroke-width="1.2"/>"#
        );
    }

    pub fn vertical_ray(&mut self, x: f64, stroke: &str) {
        let v = &self.view;
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}" stroke-width="1.2"/>"#,
            v.px(x),
            v.py(0.0_f64.max(v.y0)),
            v.px(x),
            v.py(v.y1)
        );
    }

    fn render(&self, out: &mut String) {
        let v = &self.view;
        let (l, r) = (v.left + MARGIN, v.left + v.width - MARGIN);
        let (t, b) = (MARGIN, v.height - MARGIN);
        let _ = writeln!(out, r#"<g font-family="sans-serif" font-size="11">"#);
        let _ = writeln!(out, r##"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##, r - l, b - t);
        for k in 0..=4 {
            let x = v.x0 + (v.x1 - v.x0) * k as f64 / 4.0;
            let y = v.y0 + (v.y1 - v.y0) * k as f64 / 4.0;
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, v.px(x), b + 14.0, tick(x));
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, l - 4.0, v.py(y) + 4.0, tick(y));
        }
        if v.y0 < 0.0 && v.y1 > 0.0 {
            let _ = writeln!(out, r##"<line x1="{l:.2}" y1="{0:.2}" x2="{r:.2}" y2="{0:.2}" stroke="#bbb"/>"##, v.py(0.0));
        }
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (l + r) / 2.0, b + 32.0, esc(&self.labels.0));
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
            l - 34.0,
            (t + b) / 2.0,
            l - 34.0,
            (t + b) / 2.0,
            esc(&self.labels.1)
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#, (l + r) / 2.0, t - 12.0, esc(&self.title));
        let _ = writeln!(out, r#"<clipPath id="c{0}"><rect x="{l:.2}" y="{t:.2}" width="{1:.2}" height="{2:.2}"/></clipPath><g clip-path="url(#c{0})">"#, v.left as i64, r - l, b - t);
        out.push_str(&self.body);
        out.push_str("</g>\n</g>\n");
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        format!("{}", (v * 100.0).round() / 100.0)
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Lays panels out left to right.
pub fn document(panels: &mut [Panel]) -> String {
    let mut left = 0.0;
    for p in panels.iter_mut() {
        p.view.left = left;
        left += p.view.width;
    }
    let height = panels.iter().map(|p| p.view.height).fold(0.0, f64::max);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{left:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {left:.0} {height:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for p in panels.iter() {
        p.render(&mut out);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panel_renders() {
        let mut p = Panel::new(Viewport::new(-2.0, 2.0, 0.0, 2.0, 400.0, 300.0), "H", "x", "y");
        p.semicircle(0.0, 1.0, color(0));
        p.vertical_ray(1.0, color(1));
        p.polyline([(0.0, 0.5), (1.0, 1.5)], color(2));
        let svg = document(&mut [p]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(" A"));
        assert!(svg.contains("<line"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn panels_side_by_side() {
        let a = Panel::new(Viewport::new(0.0, 1.0, 0.0, 1.0, 300.0, 300.0), "a", "x1", "y1");
        let b = Panel::new(Viewport::new(0.0, 1.0, 0.0, 1.0, 300.0, 300.0), "b", "x2", "y2");
        let svg = document(&mut [a, b]);
        assert!(svg.contains("width=\"600\""));
    }
}
