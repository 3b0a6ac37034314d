//! SVG plots: filled contour bands of a P1 field, the domain outline, a
//! nodal overlay and the half-disk arcs.

use std::fmt::Write as _;

use dumbbell_core::analysis::NodalPath;
use dumbbell_core::geometry::{Point, SubregionLayout};
use dumbbell_core::mesh::Mesh;

/// Number of uniform contour bands.
pub const BANDS: usize = 12;

/// Blue to red through white, low to high.
const PALETTE: [&str; BANDS] = [
    "#313695", "#4575b4", "#74add1", "#abd9e9", "#e0f3f8", "#f7fbff", "#fff7ec", "#fee090", "#fdae61", "#f46d43",
    "#d73027", "#a50026",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    /// Width of the drawing in pixels; height keeps the aspect ratio.
    pub width: f64,
    pub margin: f64,
    pub title: Option<String>,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self { width: 900.0, margin: 10.0, title: None }
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Overlays<'a> {
    pub nodal: Option<&'a NodalPath>,
    pub layout: Option<&'a SubregionLayout>,
}

struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
    margin: f64,
}

impl Frame {
    fn map(&self, p: Point) -> (f64, f64) {
        (self.margin + (p.x - self.x0) * self.scale, self.margin + (self.y1 - p.y) * self.scale)
    }
}

fn push_point(d: &mut String, cmd: char, (x, y): (f64, f64)) {
    write!(d, "{cmd}{x:.2} {y:.2}").unwrap();
}

/// Clips a triangle carrying linear values to `lo ≤ u ≤ hi`.
fn band_piece(tri: [(Point, f64); 3], lo: f64, hi: f64) -> Vec<Point> {
    let clip = |poly: Vec<(Point, f64)>, side: &dyn Fn(f64) -> f64| -> Vec<(Point, f64)> {
        let n = poly.len();
        let mut out = Vec::with_capacity(n + 1);
        for k in 0..n {
            let (p, q) = (poly[k], poly[(k + 1) % n]);
            let (sp, sq) = (side(p.1), side(q.1));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push((p.0.lerp(q.0, t), p.1 + t * (q.1 - p.1)));
            }
        }
        out
    };
    let poly = clip(tri.to_vec(), &|u| u - lo);
    let poly = if poly.len() >= 3 { clip(poly, &|u| hi - u) } else { poly };
    poly.into_iter().map(|p| p.0).collect()
}

/// Renders `mesh` with optional field bands and overlays. Output depends only
/// on the inputs.
pub fn render_svg(mesh: &Mesh, field: Option<&[f64]>, overlays: Overlays<'_>, style: &SvgStyle) -> String {
    let bb = dumbbell_core::geometry::BBox::of(mesh.vertices.iter().copied());
    let scale = (style.width - 2.0 * style.margin) / bb.width().max(f64::MIN_POSITIVE);
    let frame = Frame { x0: bb.min.x, y1: bb.max.y, scale, margin: style.margin };
    let height = bb.height() * scale + 2.0 * style.margin;

    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{:.0}" height="{:.0}" viewBox="0 0 {:.2} {:.2}">"#,
        style.width, height, style.width, height
    )
    .unwrap();
    if let Some(t) = &style.title {
        writeln!(s, "<title>{}</title>", escape(t)).unwrap();
    }

    if let Some(u) = field {
        let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let step = if hi > lo { (hi - lo) / BANDS as f64 } else { 1.0 };
        let mut paths = vec![String::new(); BANDS];
        for tri in &mesh.triangles {
            let corners = tri.map(|i| (mesh.vertices[i], u[i]));
            let (tmin, tmax) =
                corners.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), c| (a.min(c.1), b.max(c.1)));
            let first = (((tmin - lo) / step) as usize).min(BANDS - 1);
            let last = (((tmax - lo) / step) as usize).min(BANDS - 1);
            for (b, d) in paths.iter_mut().enumerate().take(last + 1).skip(first) {
                let (blo, bhi) = (lo + step * b as f64, if b + 1 == BANDS { hi } else { lo + step * (b + 1) as f64 });
                let piece =
                    if first == last { corners.iter().map(|c| c.0).collect() } else { band_piece(corners, blo, bhi) };
                if piece.len() < 3 {
                    continue;
                }
                for (k, p) in piece.iter().enumerate() {
                    push_point(d, if k == 0 { 'M' } else { 'L' }, frame.map(*p));
                }
                d.push('Z');
            }
        }
        writeln!(s, r#"<g id="bands" stroke="none">"#).unwrap();
        for (b, d) in paths.iter().enumerate() {
            if !d.is_empty() {
                // hairline stroke in the fill colour hides anti-aliasing seams
                writeln!(s, r#"<path fill="{c}" stroke="{c}" stroke-width="0.3" d="{d}"/>"#, c = PALETTE[b]).unwrap();
            }
        }
        writeln!(s, "</g>").unwrap();
    }

    let mut outline = String::new();
    for e in &mesh.boundary_edges {
        push_point(&mut outline, 'M', frame.map(mesh.vertices[e.a]));
        push_point(&mut outline, 'L', frame.map(mesh.vertices[e.b]));
    }
    writeln!(s, r##"<path id="outline" fill="none" stroke="#000000" stroke-width="1.2" d="{outline}"/>"##).unwrap();

    if let Some(layout) = overlays.layout {
        let mut d = String::new();
        for arc in [&layout.s1, &layout.s2] {
            for (k, p) in arc.iter().enumerate() {
                push_point(&mut d, if k == 0 { 'M' } else { 'L' }, frame.map(*p));
            }
        }
        writeln!(
            s,
            r##"<path id="arcs" fill="none" stroke="#444444" stroke-width="1" stroke-dasharray="4 3" d="{d}"/>"##
        )
        .unwrap();
    }
    if let Some(path) = overlays.nodal {
        let mut d = String::new();
        for c in &path.components {
            for (k, p) in c.points.iter().enumerate() {
                push_point(&mut d, if k == 0 { 'M' } else { 'L' }, frame.map(*p));
            }
        }
        writeln!(s, r##"<path id="nodal" fill="none" stroke="#00a000" stroke-width="2" d="{d}"/>"##).unwrap();
    }
    writeln!(s, "</svg>").unwrap();
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use dumbbell_core::geometry::PolygonDomain;
    use dumbbell_core::mesh::{triangulate, MeshParams};

    fn square() -> Mesh {
        let d = PolygonDomain::rectangle(Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap();
        triangulate(&d, &MeshParams::uniform(0.1)).unwrap()
    }

    #[test]
    fn outline_only_without_field_or_path() {
        let mesh = square();
        let empty = NodalPath { components: vec![], boundary_intersections: 0, closed_components: 0 };
        let svg = render_svg(&mesh, None, Overlays { nodal: Some(&empty), layout: None }, &SvgStyle::default());
        assert!(svg.contains(r#"id="outline""#));
        assert!(!svg.contains(r#"id="bands""#));
        assert!(svg.contains(r##"id="nodal" fill="none" stroke="#00a000" stroke-width="2" d="""##));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn bands_cover_field_range() {
        let mesh = square();
        let u: Vec<f64> = mesh
            .vertices
            .iter()
            .map(|p| (std::f64::consts::PI * p.x).sin() * (std::f64::consts::PI * p.y).sin())
            .collect();
        let svg = render_svg(&mesh, Some(&u), Overlays::default(), &SvgStyle::default());
        assert_eq!(svg.matches("<path fill=").count(), BANDS);
        assert_eq!(svg, render_svg(&mesh, Some(&u), Overlays::default(), &SvgStyle::default()));
    }

    #[test]
    fn band_clip_splits_triangle() {
        let tri = [(Point::new(0.0, 0.0), 0.0), (Point::new(1.0, 0.0), 1.0), (Point::new(0.0, 1.0), 0.0)];
        let piece = band_piece(tri, 0.5, 1.0);
        let area = dumbbell_core::geometry::signed_area(&piece);
        assert!((area - 0.125).abs() < 1e-12, "{area}");
    }
}
