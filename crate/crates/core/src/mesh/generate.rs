use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use super::{triangle_angles, BoundaryEdge, Mesh, MeshParams};
use crate::error::{invalid, Error, Result};
use crate::geometry::{BBox, DumbbellSpec, Point, PolygonDomain, Region};

/// Resolution of the integer key grid below the root cell size.
const KEY_LEVELS: u32 = 20;
/// Deepest quadtree level.
const MAX_LEVEL: u32 = 12;

/// Triangulates a polygonal domain. Every vertex and triangle is tagged
/// [`Region::Omega1`]; see [`triangulate_dumbbell`] for dumbbell tagging.
///
/// Interior vertices start from a quadtree point cloud anchored on a square
/// lattice whose cell diagonals do not exceed `h_max` and which contains
/// ℤ², so identical sub-areas of different domains share
/// vertex positions away from local refinement. Boundary edges are
/// subdivided at the local size, and constrained Delaunay refinement
/// enforces the angle bound.
pub fn triangulate(domain: &PolygonDomain, params: &MeshParams) -> Result<Mesh> {
    let h = params.h_max;
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h_max", format!("must be positive, got {h}")));
    }
    if !(params.min_angle_deg >= 0.0 && params.min_angle_deg < 34.0) {
        return Err(invalid("min_angle", format!("must lie in [0, 34) degrees, got {}", params.min_angle_deg)));
    }
    domain.validate()?;

    let mut points: Vec<Point> = Vec::new();
    let mut constraints: Vec<[usize; 2]> = Vec::new();
    for ring in &domain.rings {
        let start = points.len();
        let n = ring.len();
        for i in 0..n {
            subdivide_edge(ring[i], ring[(i + 1) % n], params, &mut points);
        }
        let end = points.len();
        for k in start..end {
            constraints.push([k, if k + 1 == end { start } else { k + 1 }]);
        }
    }
    points.extend(interior_cloud(domain, params));

    let vertices: Vec<Point2<f64>> = points.iter().map(|p| Point2::new(p.x, p.y)).collect();
    let mut conflicts = 0usize;
    let mut cdt =
        ConstrainedDelaunayTriangulation::<Point2<f64>>::try_bulk_load_cdt(vertices, constraints, |_| conflicts += 1)
            .map_err(|e| Error::Meshing(format!("{e:?}")))?;
    if conflicts > 0 {
        return Err(Error::Meshing(format!("{conflicts} boundary segments overlap")));
    }
    let refinement = RefinementParameters::<f64>::new()
        .exclude_outer_faces(true)
        .with_angle_limit(AngleLimit::from_deg(params.min_angle_deg))
        .with_max_allowed_area(0.55 * h * h)
        .with_max_additional_vertices(4 * cdt.num_vertices() + 1000);
    let result = cdt.refine(refinement);
    if !result.refinement_complete {
        return Err(Error::Meshing("refinement exhausted its vertex budget".into()));
    }

    let mut excluded = alloc::vec![false; cdt.num_all_faces()];
    for f in &result.excluded_faces {
        excluded[f.index()] = true;
    }
    let mut remap: Vec<usize> = alloc::vec![usize::MAX; cdt.num_vertices()];
    let mut verts: Vec<Point> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for face in cdt.inner_faces() {
        if excluded[face.fix().index()] {
            continue;
        }
        let tri = face.vertices().map(|v| {
            let k = v.fix().index();
            if remap[k] == usize::MAX {
                remap[k] = verts.len();
                let p = v.position();
                verts.push(Point::new(p.x, p.y));
            }
            remap[k]
        });
        triangles.push(tri);
    }
    finish(domain, params, verts, triangles)
}

/// Builds Ω_ε, meshes it and tags regions with [`DumbbellSpec::classify_point`].
/// An optional extra hole (an obstacle) is taken from `domain` when given.
pub fn triangulate_dumbbell(spec: &DumbbellSpec, domain: Option<&PolygonDomain>, params: &MeshParams) -> Result<Mesh> {
    let built;
    let dom = match domain {
        Some(d) => d,
        None => {
            built = spec.build()?;
            &built
        }
    };
    let mut mesh = triangulate(dom, params)?;
    mesh.tag_regions(|p| spec.classify_point(p));
    Ok(mesh)
}

fn finish(
    domain: &PolygonDomain,
    params: &MeshParams,
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
) -> Result<Mesh> {
    let mut mesh = Mesh {
        vertices,
        triangles,
        boundary_edges: Vec::new(),
        vertex_region: Vec::new(),
        triangle_region: Vec::new(),
        h_max_used: params.h_max,
        min_angle_achieved: 0.0,
        holes: domain.holes().len(),
    };
    let mut worst = (f64::INFINITY, Point::default());
    for t in 0..mesh.n_triangles() {
        if mesh.triangle_area(t) <= 0.0 {
            return Err(Error::DegenerateTriangle(t));
        }
        let [a, b, c] = mesh.corners(t);
        let ang = triangle_angles(a, b, c).into_iter().fold(f64::INFINITY, f64::min);
        if ang < worst.0 {
            worst = (ang, mesh.centroid(t));
        }
    }
    mesh.min_angle_achieved = worst.0;
    // spade's refinement skips triangles whose circumcentre lands outside
    // the domain; allow a sliver of slack before reporting failure
    if worst.0 < params.min_angle_deg - 1e-9 {
        return Err(Error::QualityUnreachable { worst_angle_deg: worst.0, x: worst.1.x, y: worst.1.y });
    }

    // Boundary edges appear in exactly one triangle; orient them as in it.
    let counts = mesh.edge_counts();
    for &[i, j, k] in &mesh.triangles {
        for (a, b) in [(i, j), (j, k), (k, i)] {
            if counts[&(a.min(b), a.max(b))] == 1 {
                let mid = mesh.vertices[a].lerp(mesh.vertices[b], 0.5);
                let (marker, _) = domain.nearest_marker(mid);
                mesh.boundary_edges.push(BoundaryEdge { a, b, marker });
            }
        }
    }
    if counts.values().any(|&c| c > 2) {
        return Err(Error::Meshing("non-manifold edge in triangulation".into()));
    }
    for e in &mesh.boundary_edges {
        for v in [e.a, e.b] {
            let d = domain.boundary_distance(mesh.vertices[v]);
            if d > 1e-10 {
                return Err(Error::Meshing(format!("boundary vertex {v} is {d:e} off the input boundary")));
            }
        }
    }
    let n = mesh.n_vertices();
    mesh.vertex_region = alloc::vec![Region::Omega1; n];
    mesh.triangle_region = alloc::vec![Region::Omega1; mesh.n_triangles()];
    Ok(mesh)
}

/// Points along `[a, b)` with spacing following the size field.
fn subdivide_edge(a: Point, b: Point, params: &MeshParams, out: &mut Vec<Point>) {
    let len = a.dist(b);
    let dir = (b - a) * (1.0 / len);
    let mut ts = alloc::vec![0.0];
    let mut t = 0.0;
    while t < len {
        let s = params.size_field.at(a + dir * t, params.h_max);
        // look ahead so that the step also respects the size at its end
        t += s.min(params.size_field.at(a + dir * (t + s).min(len), params.h_max));
        ts.push(t);
    }
    // compress the marched steps so that they end exactly at `b`
    let m = ts.len() - 1;
    let scale = len / ts[m];
    out.extend(ts[..m].iter().map(|&tk| a + dir * (tk * scale)));
}

/// Quadtree vertices strictly inside `domain`, kept away from the boundary
/// by half the local cell size.
fn interior_cloud(domain: &PolygonDomain, params: &MeshParams) -> Vec<Point> {
    let h = params.h_max;
    // root cell side: the largest 1/n whose diagonal fits in h
    let root = 1.0 / libm::ceil(core::f64::consts::SQRT_2 / h);
    let bb = domain.bbox();
    let scale = (1u64 << KEY_LEVELS) as f64;
    let unit = root / scale;
    let (i0, i1) = (libm::floor(bb.min.x / root) as i64, libm::ceil(bb.max.x / root) as i64);
    let (j0, j1) = (libm::floor(bb.min.y / root) as i64, libm::ceil(bb.max.y / root) as i64);

    // corner key -> smallest adjacent cell size
    let mut corners: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    let mut stack: Vec<(i64, i64, u32)> = Vec::new();
    for i in i0..i1 {
        for j in j0..j1 {
            stack.push((i, j, 0));
        }
    }
    while let Some((i, j, level)) = stack.pop() {
        let step = 1i64 << (KEY_LEVELS - level);
        let (kx, ky) = (i * step, j * step);
        let size = root / (1u64 << level) as f64;
        let cell = BBox {
            min: Point::new(kx as f64 * unit, ky as f64 * unit),
            max: Point::new((kx + step) as f64 * unit, (ky + step) as f64 * unit),
        };
        if bb.distance_to_box(&cell) > 0.0 {
            continue;
        }
        if level < MAX_LEVEL && size * core::f64::consts::SQRT_2 > params.size_field.min_over(&cell, h) * (1.0 + 1e-12)
        {
            for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                stack.push((2 * i + di, 2 * j + dj, level + 1));
            }
            continue;
        }
        for key in [(kx, ky), (kx + step, ky), (kx, ky + step), (kx + step, ky + step)] {
            let e = corners.entry(key).or_insert(size);
            *e = e.min(size);
        }
    }
    let mut seen = BTreeSet::new();
    corners
        .into_iter()
        .filter_map(|((kx, ky), size)| {
            let p = Point::new(kx as f64 * unit, ky as f64 * unit);
            (domain.contains(p) && domain.boundary_distance(p) >= 0.5 * size && seen.insert((kx, ky))).then_some(p)
        })
        .collect()
}
