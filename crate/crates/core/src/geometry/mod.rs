//! Planar geometry: points, polygonal domains with holes, the dumbbell
//! construction, convex obstacles and the half-disk subregion layout.

mod dumbbell;
mod obstacle;
mod polygon;
mod profile;
mod subregion;

use core::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub use dumbbell::{build_connector, DumbbellSpec};
pub use obstacle::{obstacle_clearance, subtract_obstacle, ObstacleShape};
pub use polygon::{point_segment_distance, segments_intersect, BBox, EdgeMarker, PolygonDomain};
pub use profile::BumpProfile;
pub use subregion::{subregions, HalfDisk, SubregionLayout};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn dist(self, other: Self) -> f64 {
        (self - other).norm()
    }

    /// Reflection across the x₁ axis.
    pub fn mirror_y(self) -> Self {
        Self::new(self.x, -self.y)
    }

    pub fn lerp(self, other: Self, t: f64) -> Self {
        self + (other - self) * t
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Which part of the dumbbell a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Omega1,
    Omega2,
    Connector,
    Outside,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Omega1, Region::Omega2, Region::Connector, Region::Outside];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Omega1 => "omega1",
            Region::Omega2 => "omega2",
            Region::Connector => "connector",
            Region::Outside => "outside",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

/// Signed area of a closed vertex loop (positive when counter-clockwise).
pub fn signed_area(ring: &[Point]) -> f64 {
    let n = ring.len();
    let mut twice = 0.0;
    for i in 0..n {
        twice += ring[i].cross(ring[(i + 1) % n]);
    }
    0.5 * twice
}
