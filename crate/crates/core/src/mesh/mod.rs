//! Conforming triangulations with region tags and boundary markers.

mod generate;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{BBox, DumbbellSpec, EdgeMarker, Point, Region};

pub use generate::{triangulate, triangulate_dumbbell};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub marker: EdgeMarker,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub vertex_region: Vec<Region>,
    /// Region of each triangle centroid.
    pub triangle_region: Vec<Region>,
    pub h_max_used: f64,
    pub min_angle_achieved: f64,
    pub holes: usize,
}

/// Target element size as a function of position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SizeField {
    /// `h_max` everywhere.
    Uniform,
    /// `fine` inside `zone`, growing linearly with slope `grading - 1` away
    /// from it, capped at `h_max`. Neighbouring elements then differ in size
    /// by at most the factor `grading`.
    Graded { fine: f64, zone: BBox, grading: f64 },
}

impl SizeField {
    /// Default refinement around the connector: `factor · ε` inside its
    /// bounding box.
    pub fn connector(spec: &DumbbellSpec, factor: f64, grading: f64) -> Self {
        SizeField::Graded { fine: factor * spec.epsilon, zone: spec.connector_bbox(), grading }
    }

    pub fn at(&self, p: Point, h_max: f64) -> f64 {
        match *self {
            SizeField::Uniform => h_max,
            SizeField::Graded { fine, zone, grading } => (fine + (grading - 1.0) * zone.distance(p)).min(h_max),
        }
    }

    /// Smallest value over an axis-aligned box.
    pub(crate) fn min_over(&self, cell: &BBox, h_max: f64) -> f64 {
        match *self {
            SizeField::Uniform => h_max,
            SizeField::Graded { fine, zone, grading } => {
                (fine + (grading - 1.0) * zone.distance_to_box(cell)).min(h_max)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshParams {
    pub h_max: f64,
    pub min_angle_deg: f64,
    pub size_field: SizeField,
}

impl MeshParams {
    pub fn uniform(h_max: f64) -> Self {
        Self { h_max, min_angle_deg: 20.0, size_field: SizeField::Uniform }
    }
}

impl Mesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        let [i, j, k] = self.triangles[t];
        [self.vertices[i], self.vertices[j], self.vertices[k]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * (b - a).cross(c - a)
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.corners(t);
        Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    pub fn area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    /// Undirected edges with the number of incident triangles.
    pub fn edge_counts(&self) -> BTreeMap<(usize, usize), u32> {
        let mut counts = BTreeMap::new();
        for &[i, j, k] in &self.triangles {
            for (a, b) in [(i, j), (j, k), (k, i)] {
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }

    pub fn n_edges(&self) -> usize {
        self.edge_counts().len()
    }

    /// `V − E + T`; equals `1 − holes` for a connected planar mesh.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_triangles() as i64
    }

    /// Flags vertices lying on a boundary edge with one of `markers`.
    pub fn boundary_mask(&self, markers: &[EdgeMarker]) -> Vec<bool> {
        let mut mask = alloc::vec![false; self.n_vertices()];
        for e in self.boundary_edges.iter().filter(|e| markers.contains(&e.marker)) {
            mask[e.a] = true;
            mask[e.b] = true;
        }
        mask
    }

    /// Re-evaluates region tags with a classifier.
    pub fn tag_regions(&mut self, classify: impl Fn(Point) -> Region) {
        self.vertex_region = self.vertices.iter().map(|&p| classify(p)).collect();
        self.triangle_region = (0..self.n_triangles()).map(|t| classify(self.centroid(t))).collect();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub min_angle_deg: f64,
    pub max_angle_deg: f64,
    /// Bin edges (length `counts.len() + 1`) and counts of edge lengths.
    pub edge_length_bins: Vec<f64>,
    pub edge_length_counts: Vec<usize>,
    pub triangles_per_region: BTreeMap<Region, usize>,
    pub min_area: f64,
}

/// Interior angles of a triangle in degrees.
pub fn triangle_angles(a: Point, b: Point, c: Point) -> [f64; 3] {
    let at = |p: Point, q: Point, r: Point| {
        let (u, v) = (q - p, r - p);
        libm::atan2(u.cross(v).abs(), u.dot(v)).to_degrees()
    };
    [at(a, b, c), at(b, c, a), at(c, a, b)]
}

pub fn mesh_quality(mesh: &Mesh) -> QualityReport {
    const BINS: usize = 10;
    let mut min_angle = f64::INFINITY;
    let mut max_angle: f64 = 0.0;
    let mut min_area = f64::INFINITY;
    let mut per_region = BTreeMap::new();
    for t in 0..mesh.n_triangles() {
        let [a, b, c] = mesh.corners(t);
        for ang in triangle_angles(a, b, c) {
            min_angle = min_angle.min(ang);
            max_angle = max_angle.max(ang);
        }
        min_area = min_area.min(mesh.triangle_area(t));
        let region = mesh.triangle_region.get(t).copied().unwrap_or(Region::Outside);
        *per_region.entry(region).or_insert(0) += 1;
    }
    let lengths: Vec<f64> = mesh.edge_counts().keys().map(|&(i, j)| mesh.vertices[i].dist(mesh.vertices[j])).collect();
    let lo = lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lengths.iter().copied().fold(0.0, f64::max);
    let width = if hi > lo { (hi - lo) / BINS as f64 } else { 1.0 };
    let bins: Vec<f64> = (0..=BINS).map(|k| lo + width * k as f64).collect();
    let mut counts = alloc::vec![0; BINS];
    for l in lengths {
        let k = (((l - lo) / width) as usize).min(BINS - 1);
        counts[k] += 1;
    }
    QualityReport {
        min_angle_deg: min_angle,
        max_angle_deg: max_angle,
        edge_length_bins: bins,
        edge_length_counts: counts,
        triangles_per_region: per_region,
        min_area,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_triangles(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Mesh {
        let n = vertices.len();
        let t = triangles.len();
        Mesh {
            vertices,
            triangles,
            boundary_edges: Vec::new(),
            vertex_region: alloc::vec![Region::Omega1; n],
            triangle_region: alloc::vec![Region::Omega1; t],
            h_max_used: 1.0,
            min_angle_achieved: 0.0,
            holes: 0,
        }
    }

    #[test]
    fn equilateral_triangle_quality() {
        let s = libm::sqrt(3.0) / 2.0;
        let m = from_triangles(
            alloc::vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, s)],
            alloc::vec![[0, 1, 2]],
        );
        let q = mesh_quality(&m);
        assert!((q.min_angle_deg - 60.0).abs() < 1e-12);
        assert!((q.max_angle_deg - 60.0).abs() < 1e-12);
        assert_eq!(q.edge_length_counts.iter().sum::<usize>(), 3);
    }

    #[test]
    fn split_square_quality() {
        let v = alloc::vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        let m = from_triangles(v, alloc::vec![[0, 1, 2], [0, 2, 3]]);
        let q = mesh_quality(&m);
        assert!((q.min_angle_deg - 45.0).abs() < 1e-12);
        assert!((q.max_angle_deg - 90.0).abs() < 1e-12);
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(q.triangles_per_region[&Region::Omega1], 2);
    }

    #[test]
    fn graded_field_respects_cap_and_slope() {
        let zone = BBox { min: Point::new(-1.0, -0.1), max: Point::new(1.0, 0.1) };
        let f = SizeField::Graded { fine: 0.01, zone, grading: 1.5 };
        assert_eq!(f.at(Point::new(0.0, 0.0), 0.04), 0.01);
        assert!((f.at(Point::new(0.0, 0.12), 0.04) - 0.02).abs() < 1e-15);
        assert_eq!(f.at(Point::new(-2.0, 0.0), 0.04), 0.04);
    }
}
