use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{signed_area, Point};
use crate::error::{Error, Result};

/// Tag carried by every polygon edge and, later, by every boundary edge of a
/// mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeMarker {
    /// Physical boundary of the dumbbell.
    Outer,
    /// Boundary of an inserted obstacle.
    Obstacle,
    /// Artificial cut (for example the half-disk arcs bounding a subregion).
    Synthetic,
}

impl EdgeMarker {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeMarker::Outer => "outer",
            EdgeMarker::Obstacle => "obstacle",
            EdgeMarker::Synthetic => "synthetic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [EdgeMarker::Outer, EdgeMarker::Obstacle, EdgeMarker::Synthetic].into_iter().find(|m| m.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn of(points: impl IntoIterator<Item = Point>) -> Self {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    /// Euclidean distance from `p` to the box (zero inside).
    pub fn distance(&self, p: Point) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        libm::hypot(dx, dy)
    }

    /// Distance between two boxes (zero when they overlap).
    pub fn distance_to_box(&self, other: &BBox) -> f64 {
        let dx = (self.min.x - other.max.x).max(0.0).max(other.min.x - self.max.x);
        let dy = (self.min.y - other.max.y).max(0.0).max(other.min.y - self.max.y);
        libm::hypot(dx, dy)
    }
}

/// A polygonal domain: one counter-clockwise outer ring plus clockwise hole
/// rings. Edge `i` of a ring joins vertex `i` to vertex `i + 1` (cyclically)
/// and carries `markers[ring][i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonDomain {
    pub rings: Vec<Vec<Point>>,
    pub markers: Vec<Vec<EdgeMarker>>,
}

impl PolygonDomain {
    /// Builds and validates a domain.
    pub fn new(rings: Vec<Vec<Point>>, markers: Vec<Vec<EdgeMarker>>) -> Result<Self> {
        let domain = Self { rings, markers };
        domain.validate()?;
        Ok(domain)
    }

    pub fn from_outer(ring: Vec<Point>, marker: EdgeMarker) -> Result<Self> {
        let markers = alloc::vec![marker; ring.len()];
        Self::new(alloc::vec![ring], alloc::vec![markers])
    }

    /// Axis-aligned rectangle `[min.x, max.x] × [min.y, max.y]`.
    pub fn rectangle(min: Point, max: Point) -> Result<Self> {
        if !(max.x > min.x && max.y > min.y) {
            return Err(Error::InvalidPolygon(format!("degenerate rectangle {min:?} {max:?}")));
        }
        Self::from_outer(alloc::vec![min, Point::new(max.x, min.y), max, Point::new(min.x, max.y)], EdgeMarker::Outer)
    }

    pub fn outer(&self) -> &[Point] {
        &self.rings[0]
    }

    pub fn holes(&self) -> &[Vec<Point>] {
        &self.rings[1..]
    }

    pub fn area(&self) -> f64 {
        self.rings.iter().map(|r| signed_area(r)).sum()
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(self.outer().iter().copied())
    }

    pub fn n_edges(&self) -> usize {
        self.rings.iter().map(Vec::len).sum()
    }

    /// All edges as `(start, end, marker)`.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point, EdgeMarker)> + '_ {
        self.rings.iter().zip(&self.markers).flat_map(|(ring, marks)| {
            let n = ring.len();
            (0..n).map(move |i| (ring[i], ring[(i + 1) % n], marks[i]))
        })
    }

    /// Even-odd point membership. Points exactly on the boundary may be
    /// reported either way; use [`Self::contains_closed`] when that matters.
    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b, _) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Membership of the closure, with `tol` slack around the boundary.
    pub fn contains_closed(&self, p: Point, tol: f64) -> bool {
        self.contains(p) || self.boundary_distance(p) <= tol
    }

    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges().map(|(a, b, _)| point_segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
    }

    /// Distance from `p` to the closed domain (zero inside).
    pub fn distance(&self, p: Point) -> f64 {
        if self.contains(p) {
            0.0
        } else {
            self.boundary_distance(p)
        }
    }

    /// Marker of the edge closest to `p`.
    pub fn nearest_marker(&self, p: Point) -> (EdgeMarker, f64) {
        let mut best = (EdgeMarker::Outer, f64::INFINITY);
        for (a, b, m) in self.edges() {
            let d = point_segment_distance(p, a, b);
            if d < best.1 {
                best = (m, d);
            }
        }
        best
    }

    /// Sorted crossings of the vertical line `x₁ = z` with the boundary,
    /// returned as disjoint intervals of x′. Vertices on the line count as
    /// lying to its left, so vertical edges never contribute.
    pub fn vertical_section(&self, z: f64) -> Vec<(f64, f64)> {
        let mut ys: Vec<f64> = self
            .edges()
            .filter(|(a, b, _)| (a.x <= z) != (b.x <= z))
            .map(|(a, b, _)| a.y + (z - a.x) * (b.y - a.y) / (b.x - a.x))
            .collect();
        ys.sort_by(f64::total_cmp);
        ys.chunks_exact(2).map(|c| (c[0], c[1])).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.rings.is_empty() {
            return Err(Error::InvalidPolygon("no rings".into()));
        }
        if self.rings.len() != self.markers.len() {
            return Err(Error::InvalidPolygon("ring/marker count mismatch".into()));
        }
        for (r, (ring, marks)) in self.rings.iter().zip(&self.markers).enumerate() {
            if ring.len() < 3 {
                return Err(Error::InvalidPolygon(format!("ring {r} has fewer than 3 vertices")));
            }
            if ring.len() != marks.len() {
                return Err(Error::InvalidPolygon(format!("ring {r} marker count mismatch")));
            }
            if ring.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
                return Err(Error::InvalidPolygon(format!("ring {r} has non-finite vertices")));
            }
            for i in 0..ring.len() {
                if ring[i] == ring[(i + 1) % ring.len()] {
                    return Err(Error::InvalidPolygon(format!("ring {r} repeats vertex {i}")));
                }
            }
            let area = signed_area(ring);
            if r == 0 && area <= 0.0 {
                return Err(Error::InvalidPolygon("outer ring must be counter-clockwise".into()));
            }
            if r > 0 && area >= 0.0 {
                return Err(Error::InvalidPolygon(format!("hole ring {r} must be clockwise")));
            }
        }
        self.check_simple()?;
        let outer =
            PolygonDomain { rings: alloc::vec![self.rings[0].clone()], markers: alloc::vec![self.markers[0].clone()] };
        for (h, hole) in self.holes().iter().enumerate() {
            if !outer.contains(hole[0]) {
                return Err(Error::InvalidPolygon(format!("hole {} lies outside the outer ring", h + 1)));
            }
            for (g, other) in self.holes().iter().enumerate() {
                if g != h && ring_contains(other, hole[0]) {
                    return Err(Error::InvalidPolygon(format!("holes {} and {} are nested", g + 1, h + 1)));
                }
            }
        }
        Ok(())
    }

    /// No two non-adjacent edges (over all rings) may touch.
    fn check_simple(&self) -> Result<()> {
        let edges: Vec<(usize, usize, Point, Point)> = self
            .rings
            .iter()
            .enumerate()
            .flat_map(|(r, ring)| {
                let n = ring.len();
                (0..n).map(move |i| (r, i, ring[i], ring[(i + 1) % n]))
            })
            .collect();
        for (ei, &(r1, i1, a1, b1)) in edges.iter().enumerate() {
            let n1 = self.rings[r1].len();
            for &(r2, i2, a2, b2) in &edges[ei + 1..] {
                let adjacent = r1 == r2 && (i2 == (i1 + 1) % n1 || i1 == (i2 + 1) % n1);
                if adjacent {
                    // Consecutive edges only share their common vertex; reject folds.
                    let (p, q, s) = if i2 == (i1 + 1) % n1 { (a1, b1, b2) } else { (a2, b2, b1) };
                    let d1 = q - p;
                    let d2 = s - q;
                    if d1.cross(d2) == 0.0 && d1.dot(d2) < 0.0 {
                        return Err(Error::InvalidPolygon(format!("ring {r1} folds back at edge {i1}")));
                    }
                    continue;
                }
                if segments_intersect(a1, b1, a2, b2) {
                    return Err(Error::InvalidPolygon(format!(
                        "edges {r1}:{i1} and {r2}:{i2} intersect (self-intersection)"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn ring_contains(ring: &[Point], p: Point) -> bool {
    let n = ring.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 { ((p - a).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    p.dist(a + ab * t)
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}
