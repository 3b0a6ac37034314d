use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{point_segment_distance, segments_intersect, signed_area, EdgeMarker, Point, PolygonDomain};
use crate::error::{invalid, Error, Result};

/// Slack applied to clearance comparisons so that placements meeting the
/// clearance exactly (up to rounding) stay feasible.
const CLEARANCE_SLACK: f64 = 1e-12;

/// Convex obstacle shape `D`, stored with its centroid at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct ObstacleShape {
    vertices: Vec<Point>,
}

impl TryFrom<Vec<Point>> for ObstacleShape {
    type Error = Error;
    fn try_from(v: Vec<Point>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ObstacleShape> for Vec<Point> {
    fn from(s: ObstacleShape) -> Self {
        s.vertices
    }
}

impl ObstacleShape {
    /// Validates a convex counter-clockwise loop and recentres it on its
    /// area centroid.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(invalid("obstacle", "needs at least 3 vertices"));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(invalid("obstacle", "non-finite vertex"));
        }
        if signed_area(&vertices) <= 0.0 {
            return Err(invalid("obstacle", "vertex loop must be counter-clockwise"));
        }
        for i in 0..n {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if (b - a).cross(c - b) <= 0.0 {
                return Err(invalid("obstacle", format!("not strictly convex at vertex {}", (i + 1) % n)));
            }
        }
        let c = centroid(&vertices);
        Ok(Self { vertices: vertices.into_iter().map(|p| p - c).collect() })
    }

    /// Axis-aligned square of the given side, centred at the origin.
    pub fn square(side: f64) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(invalid("side", format!("must be positive, got {side}")));
        }
        let h = 0.5 * side;
        Self::new(alloc::vec![Point::new(-h, -h), Point::new(h, -h), Point::new(h, h), Point::new(-h, h)])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn translated(&self, y: Point) -> Vec<Point> {
        self.vertices.iter().map(|&p| p + y).collect()
    }

    /// Closed membership of `p` in `y + D`.
    pub fn contains(&self, y: Point, p: Point) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i] + y;
            let b = self.vertices[(i + 1) % n] + y;
            (b - a).cross(p - a) >= 0.0
        })
    }

    /// Distance from `p` to the closed set `y + D`.
    pub fn distance(&self, y: Point, p: Point) -> f64 {
        if self.contains(y, p) {
            return 0.0;
        }
        let n = self.vertices.len();
        (0..n)
            .map(|i| point_segment_distance(p, self.vertices[i] + y, self.vertices[(i + 1) % n] + y))
            .fold(f64::INFINITY, f64::min)
    }
}

fn centroid(ring: &[Point]) -> Point {
    let n = ring.len();
    let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (p, q) = (ring[i], ring[(i + 1) % n]);
        let w = p.cross(q);
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
        a2 += w;
    }
    Point::new(cx / (3.0 * a2), cy / (3.0 * a2))
}

fn segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Distance between the boundary of `y + D` and the boundary of `domain`.
pub fn obstacle_clearance(domain: &PolygonDomain, shape: &ObstacleShape, y: Point) -> f64 {
    let obst = shape.translated(y);
    let n = obst.len();
    let mut best = f64::INFINITY;
    for (a, b, _) in domain.edges() {
        for i in 0..n {
            best = best.min(segment_distance(a, b, obst[i], obst[(i + 1) % n]));
        }
    }
    best
}

/// Removes the closed translate `y + D` from `domain`, adding one clockwise
/// hole ring marked [`EdgeMarker::Obstacle`].
///
/// Returns [`Error::InfeasiblePlacement`] when the obstacle is not strictly
/// inside the domain or comes closer than `clearance` to its boundary.
pub fn subtract_obstacle(
    domain: &PolygonDomain,
    shape: &ObstacleShape,
    y: Point,
    clearance: f64,
) -> Result<PolygonDomain> {
    if !(clearance >= 0.0 && clearance.is_finite()) {
        return Err(invalid("clearance", format!("must be non-negative, got {clearance}")));
    }
    let obst = shape.translated(y);
    if obst.iter().any(|&p| !domain.contains(p)) {
        return Err(Error::InfeasiblePlacement(format!("obstacle at ({}, {}) leaves the domain", y.x, y.y)));
    }
    if domain.holes().iter().any(|h| shape.contains(y, h[0])) {
        return Err(Error::InfeasiblePlacement(format!("obstacle at ({}, {}) swallows a hole", y.x, y.y)));
    }
    let gap = obstacle_clearance(domain, shape, y);
    if gap + CLEARANCE_SLACK < clearance.max(f64::MIN_POSITIVE) {
        return Err(Error::InfeasiblePlacement(format!(
            "obstacle at ({}, {}) is {gap:.6} from the boundary, clearance {clearance}",
            y.x, y.y
        )));
    }
    let mut rings = domain.rings.clone();
    let mut markers = domain.markers.clone();
    let hole: Vec<Point> = obst.into_iter().rev().collect();
    markers.push(alloc::vec![EdgeMarker::Obstacle; hole.len()]);
    rings.push(hole);
    PolygonDomain::new(rings, markers)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega1() -> PolygonDomain {
        PolygonDomain::rectangle(Point::new(-3.0, -1.0), Point::new(-1.0, 1.0)).unwrap()
    }

    #[test]
    fn square_hole_bookkeeping() {
        let d = omega1();
        let s = ObstacleShape::square(0.4).unwrap();
        let p = subtract_obstacle(&d, &s, Point::new(-2.0, 0.0), 0.08).unwrap();
        assert_eq!(p.rings.len(), 2);
        assert!((signed_area(&p.rings[1]) + 0.16).abs() < 1e-12);
        assert_eq!(signed_area(&p.rings[0]), 4.0);
        assert!((p.area() - 3.84).abs() < 1e-12);
        assert!(p.markers[1].iter().all(|&m| m == EdgeMarker::Obstacle));
    }

    #[test]
    fn clearance_violations_are_infeasible() {
        let d = omega1();
        let s = ObstacleShape::square(0.4).unwrap();
        let r = subtract_obstacle(&d, &s, Point::new(-1.05, 0.0), 0.1);
        assert!(matches!(r, Err(Error::InfeasiblePlacement(_))));
        // top edge at 0.9: exactly 0.1 from the boundary
        assert!(subtract_obstacle(&d, &s, Point::new(-2.0, 0.7), 0.1).is_ok());
        assert!(subtract_obstacle(&d, &s, Point::new(-2.0, 0.7), 0.11).is_err());
    }

    #[test]
    fn rejects_non_convex_or_clockwise() {
        let cw = alloc::vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)];
        assert!(ObstacleShape::new(cw).is_err());
        let dart = alloc::vec![Point::new(0.0, 0.0), Point::new(2.0, 1.0), Point::new(0.0, 2.0), Point::new(0.5, 1.0),];
        assert!(ObstacleShape::new(dart).is_err());
    }

    #[test]
    fn shape_is_recentred() {
        let tri = alloc::vec![Point::new(0.0, 0.0), Point::new(3.0, 0.0), Point::new(0.0, 3.0)];
        let s = ObstacleShape::new(tri).unwrap();
        let c = centroid(s.vertices());
        assert!(c.norm() < 1e-14);
        assert!((s.vertices()[0].x + 1.0).abs() < 1e-14);
    }

    #[test]
    fn distance_to_square() {
        let s = ObstacleShape::square(0.4).unwrap();
        let y = Point::new(-2.0, 0.0);
        assert_eq!(s.distance(y, y), 0.0);
        assert!((s.distance(y, Point::new(-1.5, 0.0)) - 0.3).abs() < 1e-14);
    }
}
