//! SVG 1.1 figures of a report.
//!
//! Frame: an 800x800 viewport showing a square window in rotation-vector
//! units, sized to the drawn sets plus 10% padding on each side. When the
//! report carries a pulled-back line, the window also covers the point of the
//! line closest to the sets.

use std::fmt::Write as _;

use rotset::{Rect, Vector2};

use crate::report::{Report, ReportError};

const SIZE: f64 = 800.0;
const PAD: f64 = 0.1;

struct Layer {
    key: &'static str,
    label: &'static str,
    color: &'static str,
    filled: bool,
}

const LAYERS: &[Layer] = &[
    Layer { key: "classical.outer", label: "classical outer", color: "#1f77b4", filled: false },
    Layer { key: "classical.inner", label: "classical inner", color: "#1f77b4", filled: true },
    Layer { key: "image.outer", label: "projective image outer", color: "#d62728", filled: false },
    Layer { key: "image.inner", label: "projective image inner", color: "#d62728", filled: true },
    Layer { key: "zaction.inner", label: "Z^3-action inner", color: "#2ca02c", filled: true },
];

struct Frame {
    x0: f64,
    y0: f64,
    side: f64,
}

impl Frame {
    fn fit(points: &[Vector2]) -> Self {
        let b = Rect::bounding(points).unwrap_or(Rect::UNIT);
        let extent = b.width().max(b.height());
        let extent = if extent > 0.0 { extent } else { 1.0 };
        let side = extent * (1.0 + 2.0 * PAD);
        Self { x0: 0.5 * (b.x0 + b.x1) - side / 2.0, y0: 0.5 * (b.y0 + b.y1) - side / 2.0, side }
    }

    fn px(&self, p: Vector2) -> (f64, f64) {
        ((p.x - self.x0) / self.side * SIZE, SIZE - (p.y - self.y0) / self.side * SIZE)
    }

    fn contains(&self, p: Vector2) -> bool {
        let eps = 1e-12 * self.side;
        p.x >= self.x0 - eps && p.x <= self.x0 + self.side + eps && p.y >= self.y0 - eps && p.y <= self.y0 + self.side + eps
    }
}

fn fmt(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" { "0.000".into() } else { s }
}

/// Tick spacing `{1, 2, 5} * 10^k` giving roughly five to ten ticks.
fn tick_step(side: f64) -> f64 {
    let raw = side / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

/// The two points where `u x + v y + w = 0` crosses the frame boundary.
fn clip_line(frame: &Frame, c: [f64; 3]) -> Option<(Vector2, Vector2)> {
    let [u, v, w] = c;
    let (x1, y1) = (frame.x0 + frame.side, frame.y0 + frame.side);
    let mut pts = Vec::new();
    if v != 0.0 {
        for x in [frame.x0, x1] {
            pts.push(Vector2::new(x, -(u * x + w) / v));
        }
    }
    if u != 0.0 {
        for y in [frame.y0, y1] {
            pts.push(Vector2::new(-(v * y + w) / u, y));
        }
    }
    pts.retain(|p| frame.contains(*p));
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let (a, b) = (*pts.first()?, *pts.last()?);
    (a != b).then_some((a, b))
}

fn line_coefficients(report: &Report) -> Result<Option<[f64; 3]>, ReportError> {
    if !report.contains("hypothesis.line") || report.get_str("hypothesis.line")? == "none" {
        return Ok(None);
    }
    match report.get_f64s("hypothesis.line")?[..] {
        [u, v, w] => Ok(Some([u, v, w])),
        _ => Err(ReportError::Value("hypothesis.line".into(), report.get_str("hypothesis.line")?.into())),
    }
}

/// Renders the polygons, the pulled-back line, axis ticks and a legend.
pub fn render(report: &Report) -> Result<String, ReportError> {
    let mut sets: Vec<(&Layer, Vec<Vector2>)> = Vec::new();
    for layer in LAYERS {
        if report.contains(layer.key) {
            sets.push((layer, report.get_points(layer.key)?));
        }
    }
    // an outer set that coincides with its inner set adds nothing
    sets.retain(|(layer, pts)| {
        let inner = layer.key.replace(".outer", ".inner");
        layer.filled || !report.contains(&inner) || report.get_points(&inner).ok().as_ref() != Some(pts)
    });
    let line = line_coefficients(report)?;

    let mut all: Vec<Vector2> = sets.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    if let Some([u, v, w]) = line {
        let b = Rect::bounding(&all).unwrap_or(Rect::UNIT);
        let c = Vector2::new(0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1));
        let n2 = u * u + v * v;
        if n2 > 0.0 {
            let t = (u * c.x + v * c.y + w) / n2;
            all.push(Vector2::new(c.x - t * u, c.y - t * v));
        }
    }
    let frame = Frame::fit(&all);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#);

    // axis ticks along the bottom and left edges
    let step = tick_step(frame.side);
    let _ = writeln!(s, r##"<g class="axes" stroke="#888" stroke-width="1" font-family="sans-serif" font-size="11" fill="#444">"##);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (frame.x0 / step).ceil() as i64;
    let last = ((frame.x0 + frame.side) / step).floor() as i64;
    for i in first..=last {
        let x = i as f64 * step;
        let (px, _) = frame.px(Vector2::new(x, frame.y0));
        let _ = writeln!(s, r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}"/>"#, fmt(px), fmt(SIZE), fmt(SIZE - 8.0));
        let _ = writeln!(s, r#"<text x="{}" y="{}" stroke="none">{:.*}</text>"#, fmt(px + 2.0), fmt(SIZE - 10.0), decimals, x);
    }
    let first = (frame.y0 / step).ceil() as i64;
    let last = ((frame.y0 + frame.side) / step).floor() as i64;
    for i in first..=last {
        let y = i as f64 * step;
        let (_, py) = frame.px(Vector2::new(frame.x0, y));
        let _ = writeln!(s, r#"<line x1="0" y1="{0}" x2="8" y2="{0}"/>"#, fmt(py));
        let _ = writeln!(s, r#"<text x="10" y="{}" stroke="none">{:.*}</text>"#, fmt(py - 2.0), decimals, y);
    }
    let _ = writeln!(s, "</g>");

    if let Some(c) = line {
        if let Some((a, b)) = clip_line(&frame, c) {
            let (ax, ay) = frame.px(a);
            let (bx, by) = frame.px(b);
            let _ = writeln!(
                s,
                r#"<line class="infinity-line" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="1.5" stroke-dasharray="6 4"/>"#,
                fmt(ax),
                fmt(ay),
                fmt(bx),
                fmt(by)
            );
        }
    }

    for (layer, pts) in &sets {
        let distinct = pts.windows(2).any(|w| w[0] != w[1]);
        if !distinct {
            let (x, y) = frame.px(pts[0]);
            let _ = writeln!(
                s,
                r#"<circle class="marker" cx="{}" cy="{}" r="5" fill="{}" stroke="black" stroke-width="1"/>"#,
                fmt(x),
                fmt(y),
                layer.color
            );
            continue;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|p| {
                let (x, y) = frame.px(*p);
                format!("{},{}", fmt(x), fmt(y))
            })
            .collect();
        let fill = if layer.filled { format!(r#"fill="{}" fill-opacity="0.35""#, layer.color) } else { r#"fill="none""#.into() };
        let _ = writeln!(
            s,
            r#"<polygon class="region" points="{}" {} stroke="{}" stroke-width="2"/>"#,
            coords.join(" "),
            fill,
            layer.color
        );
    }

    let mut legend: Vec<(&str, &str)> = sets.iter().map(|(l, _)| (l.label, l.color)).collect();
    if line.is_some() {
        legend.push(("pulled-back line at infinity", "black"));
    }
    let _ = writeln!(s, r#"<g class="legend" font-family="sans-serif" font-size="13">"#);
    for (i, (label, color)) in legend.iter().enumerate() {
        let y = 24.0 + 20.0 * i as f64;
        let _ = writeln!(s, r#"<rect x="{}" y="{}" width="14" height="14" fill="{color}"/>"#, fmt(SIZE - 250.0), fmt(y - 11.0));
        let _ = writeln!(s, r#"<text x="{}" y="{}">{label}</text>"#, fmt(SIZE - 230.0), fmt(y));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    Ok(s)
}
