use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{DumbbellSpec, Point, SubregionLayout};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndKind {
    Boundary,
    Interior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalPolyline {
    pub points: Vec<Point>,
    /// `None` for closed curves, whose last point repeats the first.
    pub ends: Option<[EndKind; 2]>,
}

impl NodalPolyline {
    pub fn is_closed(&self) -> bool {
        self.ends.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalPath {
    pub components: Vec<NodalPolyline>,
    pub boundary_intersections: usize,
    pub closed_components: usize,
}

type EdgeKey = (usize, usize);

fn key(a: usize, b: usize) -> EdgeKey {
    (a.min(b), a.max(b))
}

/// Zero level set of the P1 interpolant of `u` by marching triangles.
/// Values above `-noise_floor` count as positive.
pub fn nodal_set(u: &[f64], mesh: &Mesh, noise_floor: Option<f64>) -> Result<NodalPath> {
    if u.len() != mesh.n_vertices() {
        return Err(invalid("u", "length does not match the mesh"));
    }
    let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = noise_floor.unwrap_or(1e-9 * peak);
    if !(peak > floor) {
        return Err(Error::ZeroField);
    }
    let positive: Vec<bool> = u.iter().map(|&v| v >= -floor).collect();
    let counts = mesh.edge_counts();

    // crossing point per sign-changing edge, and the edge pairs per triangle
    let mut crossing: BTreeMap<EdgeKey, Point> = BTreeMap::new();
    let mut links: BTreeMap<EdgeKey, Vec<EdgeKey>> = BTreeMap::new();
    for tri in &mesh.triangles {
        let mut cut: Vec<EdgeKey> = Vec::with_capacity(2);
        for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
            if positive[a] != positive[b] {
                let k = key(a, b);
                crossing.entry(k).or_insert_with(|| {
                    let (i, j) = k;
                    let t = (u[i] / (u[i] - u[j])).clamp(0.0, 1.0);
                    mesh.vertices[i].lerp(mesh.vertices[j], t)
                });
                cut.push(k);
            }
        }
        if let [p, q] = cut[..] {
            links.entry(p).or_default().push(q);
            links.entry(q).or_default().push(p);
        }
    }

    let on_boundary = |k: &EdgeKey| counts.get(k).copied() == Some(1);
    let mut visited: BTreeMap<EdgeKey, bool> = crossing.keys().map(|&k| (k, false)).collect();
    let mut components = Vec::new();
    let walk = |start: EdgeKey, visited: &mut BTreeMap<EdgeKey, bool>| -> Vec<EdgeKey> {
        let mut chain = alloc::vec![start];
        visited.insert(start, true);
        let mut cur = start;
        loop {
            let next = links.get(&cur).and_then(|ns| ns.iter().copied().find(|n| !visited[n]));
            match next {
                Some(n) => {
                    visited.insert(n, true);
                    chain.push(n);
                    cur = n;
                }
                None => return chain,
            }
        }
    };
    // open chains start at boundary crossings, in key order
    let starts: Vec<EdgeKey> = crossing.keys().copied().filter(|k| on_boundary(k)).collect();
    for s in starts {
        if visited[&s] {
            continue;
        }
        let chain = walk(s, &mut visited);
        let last = *chain.last().expect("chain has a start");
        let kind = |k: &EdgeKey| if on_boundary(k) { EndKind::Boundary } else { EndKind::Interior };
        components.push(NodalPolyline {
            points: chain.iter().map(|k| crossing[k]).collect(),
            ends: Some([kind(&s), kind(&last)]),
        });
    }
    // what remains are closed loops
    let rest: Vec<EdgeKey> = crossing.keys().copied().collect();
    for s in rest {
        if visited[&s] {
            continue;
        }
        let chain = walk(s, &mut visited);
        let closes = links.get(chain.last().expect("chain has a start")).is_some_and(|ns| ns.contains(&s));
        let mut points: Vec<Point> = chain.iter().map(|k| crossing[k]).collect();
        if closes && chain.len() > 2 {
            points.push(points[0]);
            components.push(NodalPolyline { points, ends: None });
        } else {
            components.push(NodalPolyline { points, ends: Some([EndKind::Interior, EndKind::Interior]) });
        }
    }
    let boundary_intersections = crossing.keys().filter(|k| on_boundary(k)).count();
    let closed_components = components.iter().filter(|c| c.is_closed()).count();
    Ok(NodalPath { components, boundary_intersections, closed_components })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub contained: bool,
    /// Polyline vertex farthest from `D_{r₁} ∪ Q_ε ∪ D_{r₂}`, with its
    /// distance; `None` for an empty path.
    pub worst_excursion: Option<(Point, f64)>,
}

/// Whether every nodal vertex lies in `D_{r₁} ∪ Q_ε ∪ D_{r₂}`, up to 1e-9.
pub fn nodal_containment(path: &NodalPath, layout: &SubregionLayout, spec: &DumbbellSpec) -> Result<ContainmentReport> {
    let connector = spec.connector()?;
    let mut worst: Option<(Point, f64)> = None;
    for p in path.components.iter().flat_map(|c| c.points.iter().copied()) {
        let d = connector.distance(p).min(layout.disk1.distance(p)).min(layout.disk2.distance(p));
        if worst.is_none_or(|(_, w)| d > w) {
            worst = Some((p, d));
        }
    }
    let contained = worst.is_none_or(|(_, d)| d <= 1e-9);
    Ok(ContainmentReport { contained, worst_excursion: worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{subregions, PolygonDomain};
    use crate::mesh::{triangulate, MeshParams};

    fn square(h: f64) -> Mesh {
        let dom = PolygonDomain::rectangle(Point::new(-1.0, -1.0), Point::new(1.0, 1.0)).unwrap();
        triangulate(&dom, &MeshParams::uniform(h)).unwrap()
    }

    #[test]
    fn linear_field_has_one_open_line() {
        let mesh = square(0.15);
        let u: Vec<f64> = mesh.vertices.iter().map(|p| p.x - 0.013).collect();
        let path = nodal_set(&u, &mesh, None).unwrap();
        assert_eq!(path.boundary_intersections, 2);
        assert_eq!(path.closed_components, 0);
        assert_eq!(path.components.len(), 1);
        let line = &path.components[0];
        assert_eq!(line.ends, Some([EndKind::Boundary, EndKind::Boundary]));
        assert!(line.points.iter().all(|p| (p.x - 0.013).abs() < 1e-12));
    }

    #[test]
    fn radial_field_gives_closed_loop() {
        let mesh = square(0.1);
        let u: Vec<f64> = mesh.vertices.iter().map(|p| p.norm() - 0.5).collect();
        let path = nodal_set(&u, &mesh, None).unwrap();
        assert_eq!(path.boundary_intersections, 0);
        assert_eq!(path.closed_components, 1);
        let loop_ = &path.components[0].points;
        assert_eq!(loop_.first(), loop_.last());
        assert!(loop_.iter().all(|p| (p.norm() - 0.5).abs() < 0.01));
    }

    #[test]
    fn exact_zeros_break_positive() {
        let mesh = square(0.25);
        // u vanishes on the lattice line x = 0
        let u: Vec<f64> = mesh.vertices.iter().map(|p| p.x).collect();
        let path = nodal_set(&u, &mesh, None).unwrap();
        assert_eq!(path.boundary_intersections, 2);
        assert_eq!(path.closed_components, 0);
        assert!(matches!(nodal_set(&alloc::vec![0.0; mesh.n_vertices()], &mesh, None), Err(Error::ZeroField)));
    }

    #[test]
    fn containment_examples() {
        let spec = DumbbellSpec::default_rectangles(0.05).unwrap();
        let layout = subregions(&spec, 0.3, 0.3).unwrap();
        let inside = NodalPath {
            components: alloc::vec![NodalPolyline {
                points: alloc::vec![Point::new(0.2, -0.05), Point::new(0.2, 0.05)],
                ends: Some([EndKind::Boundary; 2]),
            }],
            boundary_intersections: 2,
            closed_components: 0,
        };
        assert!(nodal_containment(&inside, &layout, &spec).unwrap().contained);
        let mut outside = inside.clone();
        outside.components[0].points.push(Point::new(-2.0, 0.0));
        let rep = nodal_containment(&outside, &layout, &spec).unwrap();
        assert!(!rep.contained);
        let (p, d) = rep.worst_excursion.unwrap();
        assert_eq!(p, Point::new(-2.0, 0.0));
        // nearest point of D_{r₁} is on its arc
        assert!((d - 0.7).abs() < 1e-12, "{d}");
    }
}
