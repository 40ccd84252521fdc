//! Minimal deterministic SVG output: scatter plots of planar clouds and
//! birth/death plots of diagrams.

use std::fmt::Write;

use crate::error::{Result, SpredError};
use crate::geometry::PointCloud;
use crate::persistence::PersistenceDiagram;

const SIZE: f64 = 400.0;
const MARGIN: f64 = 40.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

struct Canvas {
    body: String,
    lo: (f64, f64),
    hi: (f64, f64),
}

impl Canvas {
    fn new(lo: (f64, f64), hi: (f64, f64)) -> Self {
        Self { body: String::new(), lo, hi }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let span = |a: f64, b: f64| if b > a { b - a } else { 1.0 };
        let inner = SIZE - 2.0 * MARGIN;
        let px = MARGIN + (x - self.lo.0) / span(self.lo.0, self.hi.0) * inner;
        let py = SIZE - MARGIN - (y - self.lo.1) / span(self.lo.1, self.hi.1) * inner;
        (px, py)
    }

    fn line(&mut self, a: (f64, f64), b: (f64, f64), style: &str) {
        let (p, q) = (self.map(a.0, a.1), self.map(b.0, b.1));
        let _ = writeln!(self.body, r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" {style}/>"#, p.0, p.1, q.0, q.1);
    }

    fn circle(&mut self, x: f64, y: f64, color: &str) {
        let (px, py) = self.map(x, y);
        let _ = writeln!(self.body, r#"<circle cx="{px:.3}" cy="{py:.3}" r="3" fill="{color}"/>"#);
    }

    fn triangle(&mut self, x: f64, y: f64, color: &str) {
        let (px, py) = self.map(x, y);
        let _ = writeln!(
            self.body,
            r#"<polygon points="{:.3},{:.3} {:.3},{:.3} {:.3},{:.3}" fill="{color}"/>"#,
            px,
            py - 5.0,
            px - 4.5,
            py + 3.5,
            px + 4.5,
            py + 3.5
        );
    }

    fn text(&mut self, x: f64, y: f64, s: &str) {
        let _ = writeln!(self.body, r#"<text x="{x:.3}" y="{y:.3}" font-size="12" font-family="sans-serif">{s}</text>"#);
    }

    fn finish(self, title: &str) -> String {
        let mut out = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        );
        let _ = writeln!(out, r#"<text x="{MARGIN}" y="24" font-size="14" font-family="sans-serif">{title}</text>"#);
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}

/// Scatter plot of a 2-D cloud.
pub fn scatter_svg(points: &PointCloud, title: &str) -> Result<String> {
    if points.dim() != 2 {
        return Err(SpredError::DimensionMismatch { expected: 2, found: points.dim() });
    }
    let rows = points.rows();
    let fold = |f: fn(f64, f64) -> f64, init: f64, c: usize| rows.iter().map(|r| r[c]).fold(init, f);
    let (lo, hi) = ((fold(f64::min, f64::INFINITY, 0), fold(f64::min, f64::INFINITY, 1)), (fold(f64::max, f64::NEG_INFINITY, 0), fold(f64::max, f64::NEG_INFINITY, 1)));
    // equal scales on both axes
    let half = ((hi.0 - lo.0).max(hi.1 - lo.1) / 2.0).max(f64::MIN_POSITIVE);
    let mid = ((lo.0 + hi.0) / 2.0, (lo.1 + hi.1) / 2.0);
    let mut c = Canvas::new((mid.0 - half, mid.1 - half), (mid.0 + half, mid.1 + half));
    for r in &rows {
        c.circle(r[0], r[1], COLORS[0]);
    }
    Ok(c.finish(title))
}

/// Birth/death plot of one or more diagrams with the diagonal. Points that
/// never die sit on a dashed line at 1.05 times the largest finite value,
/// drawn as triangles.
pub fn diagram_svg(diagrams: &[PersistenceDiagram], title: &str) -> String {
    let max_finite = diagrams
        .iter()
        .flat_map(|d| d.pairs().iter().flat_map(|p| [p.birth, p.death]))
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let top = if max_finite > 0.0 { 1.05 * max_finite } else { 1.0 };
    let mut c = Canvas::new((0.0, 0.0), (top, top));
    c.line((0.0, 0.0), (top, top), r##"stroke="#888888" stroke-width="1""##);
    let has_essential = diagrams.iter().any(|d| d.essential().next().is_some());
    if has_essential {
        c.line((0.0, top), (top, top), r##"stroke="#888888" stroke-width="1" stroke-dasharray="4 3""##);
    }
    for (i, d) in diagrams.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        for p in d.pairs() {
            if p.is_essential() {
                c.triangle(p.birth, top, color);
            } else {
                c.circle(p.birth, p.death, color);
            }
        }
        let y = SIZE - MARGIN + 28.0;
        let x = MARGIN + 60.0 * i as f64;
        let _ = writeln!(c.body, r#"<circle cx="{:.3}" cy="{:.3}" r="3" fill="{color}"/>"#, x, y - 4.0);
        c.text(x + 6.0, y, &format!("H{}", d.degree));
    }
    c.finish(title)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::PersistencePair;

    #[test]
    fn empty_diagram_shows_only_the_diagonal() {
        let svg = diagram_svg(&[PersistenceDiagram::empty(1)], "empty");
        assert_eq!(svg.matches("<line").count(), 1);
        assert_eq!(svg.matches("<polygon").count(), 0);
        assert_eq!(svg.matches("<circle").count(), 1); // legend only
    }

    #[test]
    fn markers_and_determinism() {
        let d = PersistenceDiagram::new(0, vec![PersistencePair::new(0.0, 1.0), PersistencePair::essential(0.0)]).unwrap();
        let svg = diagram_svg(std::slice::from_ref(&d), "H0");
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg, diagram_svg(&[d], "H0"));
    }

    #[test]
    fn scatter_requires_planar_points() {
        let x = PointCloud::from_rows(&[vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(scatter_svg(&x, "x").unwrap().matches("<circle").count(), 2);
        let y = PointCloud::from_rows(&[vec![0.0, 1.0, 2.0]]).unwrap();
        assert!(scatter_svg(&y, "y").is_err());
    }
}
