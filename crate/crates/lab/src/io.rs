//! Plain-text mesh and vector files, geometry and eigen-summary JSON.

use std::fmt::Write as _;

use dumbbell_core::fem::{BoundaryCondition, EigenResult, SolveMethod};
use dumbbell_core::geometry::{EdgeMarker, Point, PolygonDomain, Region};
use dumbbell_core::mesh::{BoundaryEdge, Mesh};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Header `V E T` (vertex, boundary-edge and triangle counts), then vertex
/// lines `x y region`, triangle lines `i j k` and boundary-edge lines
/// `i j marker`. Coordinates use the shortest round-trip representation.
pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    writeln!(s, "{} {} {}", mesh.n_vertices(), mesh.boundary_edges.len(), mesh.n_triangles()).unwrap();
    for (p, r) in mesh.vertices.iter().zip(&mesh.vertex_region) {
        writeln!(s, "{} {} {}", p.x, p.y, r.as_str()).unwrap();
    }
    for t in &mesh.triangles {
        writeln!(s, "{} {} {}", t[0], t[1], t[2]).unwrap();
    }
    for e in &mesh.boundary_edges {
        writeln!(s, "{} {} {}", e.a, e.b, e.marker.as_str()).unwrap();
    }
    s
}

/// Inverse of [`write_mesh`]. Triangle regions are recomputed from
/// centroids with `classify`, or copied from the first vertex when absent.
pub fn read_mesh(text: &str, classify: Option<&dyn Fn(Point) -> Region>) -> Result<Mesh> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let bad = |line: usize, reason: &str| LabError::Parse { line: line + 1, reason: reason.to_string() };
    let (hl, header) = lines.next().ok_or_else(|| bad(0, "empty mesh file"))?;
    let counts: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(hl, "header must be three counts")))
        .collect::<Result<_>>()?;
    let [nv, ne, nt] = counts[..] else { return Err(bad(hl, "header must be three counts")) };

    let mut vertices = Vec::with_capacity(nv);
    let mut vertex_region = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (i, l) = lines.next().ok_or_else(|| bad(usize::MAX - 1, "missing vertex lines"))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        let [x, y, r] = f[..] else { return Err(bad(i, "vertex line must be `x y region`")) };
        let x: f64 = x.parse().map_err(|_| bad(i, "bad x"))?;
        let y: f64 = y.parse().map_err(|_| bad(i, "bad y"))?;
        vertices.push(Point::new(x, y));
        vertex_region.push(Region::parse(r).ok_or_else(|| bad(i, "unknown region"))?);
    }
    let index = |i: usize, t: &str| -> Result<usize> {
        let v: usize = t.parse().map_err(|_| bad(i, "bad index"))?;
        if v >= nv {
            return Err(bad(i, "index out of range"));
        }
        Ok(v)
    };
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (i, l) = lines.next().ok_or_else(|| bad(usize::MAX - 1, "missing triangle lines"))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        let [a, b, c] = f[..] else { return Err(bad(i, "triangle line must be `i j k`")) };
        triangles.push([index(i, a)?, index(i, b)?, index(i, c)?]);
    }
    let mut boundary_edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (i, l) = lines.next().ok_or_else(|| bad(usize::MAX - 1, "missing boundary lines"))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        let [a, b, m] = f[..] else { return Err(bad(i, "boundary line must be `i j marker`")) };
        let marker = EdgeMarker::parse(m).ok_or_else(|| bad(i, "unknown marker"))?;
        boundary_edges.push(BoundaryEdge { a: index(i, a)?, b: index(i, b)?, marker });
    }
    if let Some((i, _)) = lines.next() {
        return Err(bad(i, "trailing content"));
    }
    let mut mesh = Mesh {
        vertices,
        triangles,
        boundary_edges,
        vertex_region,
        triangle_region: Vec::new(),
        h_max_used: f64::NAN,
        min_angle_achieved: f64::NAN,
        holes: 0,
    };
    mesh.triangle_region = match classify {
        Some(f) => (0..mesh.n_triangles()).map(|t| f(mesh.centroid(t))).collect(),
        None => mesh.triangles.iter().map(|t| mesh.vertex_region[t[0]]).collect(),
    };
    let q = dumbbell_core::mesh::mesh_quality(&mesh);
    mesh.min_angle_achieved = q.min_angle_deg;
    // Euler: χ = V − E + T equals 1 − holes for a connected planar mesh
    mesh.holes = (1 - mesh.euler_characteristic()).max(0) as usize;
    Ok(mesh)
}

/// Pretty JSON with exact coordinates.
pub fn write_geometry(domain: &PolygonDomain) -> String {
    let mut s = serde_json::to_string_pretty(domain).expect("domain serializes");
    s.push('\n');
    s
}

pub fn read_geometry(text: &str) -> Result<PolygonDomain> {
    let d: PolygonDomain =
        serde_json::from_str(text).map_err(|e| LabError::Parse { line: e.line(), reason: e.to_string() })?;
    d.validate()?;
    Ok(d)
}

/// Eigenvalues and diagnostics; vectors live in separate files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary {
    pub bc: BoundaryCondition,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub clusters: Vec<Vec<usize>>,
    pub matvecs: usize,
    pub method: SolveMethod,
    pub n_vertices: usize,
    pub n_dofs: usize,
    pub vector_files: Vec<String>,
}

impl EigenSummary {
    pub fn new(r: &EigenResult, vector_files: Vec<String>) -> Self {
        Self {
            bc: r.bc,
            eigenvalues: r.lambdas(),
            residuals: r.residuals.clone(),
            clusters: r.clusters.clone(),
            matvecs: r.matvecs,
            method: r.method,
            n_vertices: r.n_vertices,
            n_dofs: r.n_dofs,
            vector_files,
        }
    }
}

/// One value per line, shortest round-trip representation.
pub fn write_vector(u: &[f64]) -> String {
    let mut s = String::with_capacity(u.len() * 24);
    for v in u {
        writeln!(s, "{v:e}").unwrap();
    }
    s
}

pub fn read_vector(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| l.trim().parse().map_err(|_| LabError::Parse { line: i + 1, reason: "bad float".into() }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use dumbbell_core::geometry::DumbbellSpec;
    use dumbbell_core::mesh::{triangulate_dumbbell, MeshParams};

    #[test]
    fn mesh_round_trip() {
        let spec = DumbbellSpec::default_rectangles(0.1).unwrap();
        let mesh = triangulate_dumbbell(&spec, None, &MeshParams::uniform(0.2)).unwrap();
        let text = write_mesh(&mesh);
        assert!(text.starts_with(&format!(
            "{} {} {}\n",
            mesh.n_vertices(),
            mesh.boundary_edges.len(),
            mesh.n_triangles()
        )));
        let back = read_mesh(&text, Some(&|p| spec.classify_point(p))).unwrap();
        assert_eq!(back.vertices, mesh.vertices);
        assert_eq!(back.triangles, mesh.triangles);
        assert_eq!(back.boundary_edges, mesh.boundary_edges);
        assert_eq!(back.vertex_region, mesh.vertex_region);
        assert_eq!(back.triangle_region, mesh.triangle_region);
        assert_eq!(back.holes, 0);
        assert_eq!(write_mesh(&back), text);
    }

    #[test]
    fn malformed_mesh_reports_line() {
        let err = read_mesh("1 0 0\n0.0 zero omega1\n", None).unwrap_err();
        assert!(matches!(err, LabError::Parse { line: 2, .. }), "{err:?}");
        assert!(read_mesh("1 0 1\n0 0 omega1\n0 0 5\n", None).is_err());
    }

    #[test]
    fn vector_and_geometry_round_trip() {
        let u = vec![1.0 / 3.0, -2.5e-90, 0.0];
        assert_eq!(read_vector(&write_vector(&u)).unwrap(), u);
        let d = DumbbellSpec::default_rectangles(0.05).unwrap().build().unwrap();
        let back = read_geometry(&write_geometry(&d)).unwrap();
        assert_eq!(back, d);
        assert!(read_geometry(r#"{"rings": [[[0,0],[1,0]]], "markers": [["outer","outer"]]}"#).is_err());
    }
}
