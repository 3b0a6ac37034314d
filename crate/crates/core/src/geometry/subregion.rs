use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{DumbbellSpec, EdgeMarker, Point, PolygonDomain};
use crate::error::{Error, Result};

/// Closed half-disk of radius `radius` centred on a seam point, opening
/// away from the connector (`side = -1` opens towards `x₁ < center.x`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfDisk {
    pub center: Point,
    pub radius: f64,
    pub side: f64,
}

impl HalfDisk {
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        (p.x - self.center.x) * self.side >= -tol && p.dist(self.center) <= self.radius + tol
    }

    pub fn distance(&self, p: Point) -> f64 {
        let d = p - self.center;
        let along = d.x * self.side;
        if along >= 0.0 {
            (d.norm() - self.radius).max(0.0)
        } else {
            // nearest point lies on the flat diameter
            let dy = (d.y.abs() - self.radius).max(0.0);
            libm::hypot(along.abs(), dy)
        }
    }

    pub fn area(&self) -> f64 {
        0.5 * core::f64::consts::PI * self.radius * self.radius
    }

    /// Semicircle polyline from `(c.x, c.y - r)` to `(c.x, c.y + r)`.
    fn arc(&self, segments: usize) -> Vec<Point> {
        let pi = core::f64::consts::PI;
        (0..=segments)
            .map(|k| {
                let t = -0.5 * pi + pi * k as f64 / segments as f64;
                Point::new(
                    self.center.x + self.side * self.radius * libm::cos(t),
                    self.center.y + self.radius * libm::sin(t),
                )
            })
            .map(|mut p| {
                if (p.x - self.center.x).abs() < 1e-15 {
                    p.x = self.center.x;
                }
                p
            })
            .collect()
    }
}

/// Half-disks `D_{r_i}` at the seams, their semicircles `S_{r_i}` and the
/// trimmed base domains `Ω_i′ = Ω_i \ D_{r_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubregionLayout {
    pub r1: f64,
    pub r2: f64,
    pub disk1: HalfDisk,
    pub disk2: HalfDisk,
    pub omega1_prime: PolygonDomain,
    pub omega2_prime: PolygonDomain,
    pub s1: Vec<Point>,
    pub s2: Vec<Point>,
}

impl SubregionLayout {
    /// Closed membership in `D_{r₁} ∪ D_{r₂}`.
    pub fn in_disks(&self, p: Point, tol: f64) -> bool {
        self.disk1.contains(p, tol) || self.disk2.contains(p, tol)
    }
}

pub fn subregions(spec: &DumbbellSpec, r1: f64, r2: f64) -> Result<SubregionLayout> {
    spec.validate()?;
    let segments = spec.connector_samples;
    let disk1 = HalfDisk { center: Point::new(-1.0, 0.0), radius: r1, side: -1.0 };
    let disk2 = HalfDisk { center: Point::new(1.0, 0.0), radius: r2, side: 1.0 };
    let (o1, s1) = trim(&spec.omega1, &disk1, spec.epsilon, segments, "r1")?;
    let (o2, s2) = trim(&spec.omega2, &disk2, spec.epsilon, segments, "r2")?;
    Ok(SubregionLayout { r1, r2, disk1, disk2, omega1_prime: o1, omega2_prime: o2, s1, s2 })
}

fn trim(
    base: &PolygonDomain,
    disk: &HalfDisk,
    eps: f64,
    segments: usize,
    name: &str,
) -> Result<(PolygonDomain, Vec<Point>)> {
    let r = disk.radius;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Subregion(format!("{name} = {r} must be positive")));
    }
    if r <= 2.0 * eps {
        return Err(Error::Subregion(format!(
            "{name} = {r} does not enclose the connector mouth 2*eps = {}",
            2.0 * eps
        )));
    }
    let ring = base.outer();
    let n = ring.len();
    let cx = disk.center.x;
    let upward = disk.side < 0.0;
    let seam = (0..n).find(|&i| {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        let (lo, hi) = if upward { (a.y, b.y) } else { (b.y, a.y) };
        a.x == cx && b.x == cx && lo < -r && hi > r
    });
    let Some(i) = seam else {
        return Err(Error::Subregion(format!("half-disk of radius {name} = {r} exits its base domain")));
    };
    // The closed half-disk and the one of half the radius must stay inside.
    let arc = disk.arc(segments);
    let half = HalfDisk { radius: 0.5 * r, ..*disk };
    let interior = |a: &[Point]| a[1..a.len() - 1].to_vec();
    for p in interior(&arc).iter().chain(interior(&half.arc(segments)).iter()) {
        if !base.contains_closed(*p, 1e-12) {
            return Err(Error::Subregion(format!("half-disk of radius {name} = {r} exits its base domain")));
        }
    }
    if base.rings.iter().flatten().any(|&q| q.x != cx && disk.contains(q, 0.0)) {
        return Err(Error::Subregion(format!("base boundary enters the half-disk of radius {name} = {r}")));
    }

    // Walk the ring from the far end of the seam, then replace the middle of
    // the seam by the semicircle.
    let mut pts = Vec::with_capacity(n + segments + 1);
    let mut marks = Vec::with_capacity(n + segments + 1);
    for s in 0..n {
        let idx = (i + 1 + s) % n;
        pts.push(ring[idx]);
        marks.push(base.markers[0][idx]);
    }
    // last pushed vertex is the seam start; its edge now ends at the arc
    let start_mark = base.markers[0][i];
    *marks.last_mut().expect("non-empty ring") = start_mark;
    let inward: Vec<Point> = if upward { arc.clone() } else { arc.iter().rev().copied().collect() };
    for (k, &p) in inward.iter().enumerate() {
        pts.push(p);
        marks.push(if k + 1 == inward.len() { start_mark } else { EdgeMarker::Synthetic });
    }
    let mut rings = alloc::vec![pts];
    let mut markers = alloc::vec![marks];
    rings.extend(base.rings[1..].iter().cloned());
    markers.extend(base.markers[1..].iter().cloned());
    let trimmed = PolygonDomain::new(rings, markers)?;
    Ok((trimmed, arc))
}
