use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use super::p1_square_integral;
use crate::error::{invalid, Error, Result};
use crate::geometry::{DumbbellSpec, Point, PolygonDomain, Region};
use crate::mesh::Mesh;

/// Vertical chords through a mesh, with edge multiplicities cached.
struct Sections<'a> {
    mesh: &'a Mesh,
    counts: BTreeMap<(usize, usize), u32>,
}

impl<'a> Sections<'a> {
    fn new(mesh: &'a Mesh) -> Self {
        Self { mesh, counts: mesh.edge_counts() }
    }

    /// `(∫ u² along x₁ = z, chord length)`.
    fn integrate(&self, u: &[f64], z: f64) -> (f64, f64) {
        let mesh = self.mesh;
        let (mut sum, mut length) = (0.0, 0.0);
        for tri in &mesh.triangles {
            let s = tri.map(|i| mesh.vertices[i].x - z);
            if s.iter().all(|&v| v > 0.0) || s.iter().all(|&v| v < 0.0) {
                continue;
            }
            let mut pts: Vec<(Point, f64)> = Vec::with_capacity(3);
            let mut on_line = Vec::with_capacity(3);
            for k in 0..3 {
                if s[k] == 0.0 {
                    pts.push((mesh.vertices[tri[k]], u[tri[k]]));
                    on_line.push(tri[k]);
                }
            }
            for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                if (s[a] < 0.0 && s[b] > 0.0) || (s[a] > 0.0 && s[b] < 0.0) {
                    let t = s[a] / (s[a] - s[b]);
                    let (i, j) = (tri[a], tri[b]);
                    pts.push((mesh.vertices[i].lerp(mesh.vertices[j], t), u[i] + t * (u[j] - u[i])));
                }
            }
            if pts.len() != 2 {
                continue;
            }
            // an edge lying on the line is shared with the neighbour
            let weight = if on_line.len() == 2 {
                let k = (on_line[0].min(on_line[1]), on_line[0].max(on_line[1]));
                if self.counts[&k] == 1 {
                    1.0
                } else {
                    0.5
                }
            } else {
                1.0
            };
            let l = pts[0].0.dist(pts[1].0);
            let (a, b) = (pts[0].1, pts[1].1);
            sum += weight * l / 3.0 * (a * a + a * b + b * b);
            length += weight * l;
        }
        (sum, length)
    }
}

/// `‖u‖_{L²(C(z))}` along the chord `Ω ∩ {x₁ = z}`, exact for P1 fields.
pub fn cross_section_norm(u: &[f64], mesh: &Mesh, z: f64) -> Result<f64> {
    if u.len() != mesh.n_vertices() {
        return Err(invalid("u", "length does not match the mesh"));
    }
    let (sum, length) = Sections::new(mesh).integrate(u, z);
    if !(length > 0.0) {
        return Err(Error::EmptyCrossSection(z));
    }
    Ok(libm::sqrt(sum))
}

/// Least-squares slope of `ln y` against `x` over positive `y`.
pub fn fit_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, &v)| v > 0.0).map(|(&a, &b)| (a, libm::log(b))).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayParams {
    /// Start of the branch.
    pub z0: f64,
    pub stations: usize,
    /// Multiplicative slack on the envelope.
    pub tol: f64,
    /// Right end of the aggregate integral.
    pub aggregate_end: f64,
}

impl Default for DecayParams {
    fn default() -> Self {
        Self { z0: 0.0, stations: 64, tol: 0.05, aggregate_end: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub z_grid: Vec<f64>,
    pub norms: Vec<f64>,
    pub mu_of_z: Vec<f64>,
    /// Infimum of `μ(z)` over the branch.
    pub mu: f64,
    pub lambda: f64,
    pub beta: f64,
    /// Envelope `norm(z₀)·exp(−β√(μ−λ)(z−z₀))` at each station.
    pub envelope: Vec<f64>,
    /// Slope of `ln norm` over the stations inside the connector.
    pub fitted_slope: Option<f64>,
    pub bound_violations: usize,
    pub tol: f64,
    pub aggregate_d: f64,
    /// `‖u‖²` over the connector slab `z₀ ≤ x₁ ≤ aggregate_end`.
    pub branch_mass: f64,
    /// `D · norm(z₀)²`.
    pub aggregate_bound: f64,
    pub aggregate_holds: bool,
}

/// `π² / w²` for the widest interval of the section, the first Dirichlet
/// eigenvalue of the chord.
fn section_eigenvalue(domain: &PolygonDomain, z: f64) -> Option<f64> {
    let w = domain.vertical_section(z).iter().map(|(a, b)| b - a).fold(0.0, f64::max);
    (w > 0.0).then(|| PI * PI / (w * w))
}

/// Cross-section decay of a ground state localized on Ω₁ along the branch
/// `z₀ ≤ x₁ < z₂` towards Ω₂.
pub fn decay_check(
    u: &[f64],
    mesh: &Mesh,
    spec: &DumbbellSpec,
    lambda: f64,
    params: &DecayParams,
) -> Result<DecayReport> {
    if u.len() != mesh.n_vertices() {
        return Err(invalid("u", "length does not match the mesh"));
    }
    if params.stations < 2 {
        return Err(invalid("stations", "need at least two"));
    }
    if !(params.tol >= 0.0) {
        return Err(invalid("tol", "must be non-negative"));
    }
    let domain = spec.build()?;
    let z2 = domain.bbox().max.x;
    let z0 = params.z0;
    if !(z0 < z2 && z0 >= domain.bbox().min.x) {
        return Err(invalid("z0", "must lie inside the domain's x₁ extent"));
    }

    // width is piecewise linear, so its maxima sit at polygon breakpoints
    let mut probes: Vec<f64> = Vec::new();
    for p in domain.rings.iter().flatten() {
        for z in [p.x - 1e-9, p.x + 1e-9] {
            if z > z0 && z < z2 {
                probes.push(z);
            }
        }
    }
    let z_grid: Vec<f64> = (0..params.stations).map(|k| z0 + (z2 - z0) * k as f64 / params.stations as f64).collect();
    probes.extend(z_grid.iter().copied().filter(|&z| z > z0));
    let mu = probes.iter().filter_map(|&z| section_eigenvalue(&domain, z)).fold(f64::INFINITY, f64::min);
    if !(lambda < mu) {
        return Err(Error::InapplicableHypothesis { lambda, mu });
    }

    let sections = Sections::new(mesh);
    let mut norms = Vec::with_capacity(z_grid.len());
    let mut mu_of_z = Vec::with_capacity(z_grid.len());
    for &z in &z_grid {
        let (sum, length) = sections.integrate(u, z);
        if !(length > 0.0) {
            return Err(Error::EmptyCrossSection(z));
        }
        norms.push(libm::sqrt(sum));
        mu_of_z.push(section_eigenvalue(&domain, z).ok_or(Error::EmptyCrossSection(z))?);
    }

    let beta = FRAC_1_SQRT_2;
    let rate = beta * libm::sqrt(mu - lambda);
    let envelope: Vec<f64> = z_grid.iter().map(|&z| norms[0] * libm::exp(-rate * (z - z0))).collect();
    let bound_violations = norms.iter().zip(&envelope).filter(|(n, e)| **n > **e * (1.0 + params.tol)).count();

    let inside: Vec<usize> = (0..z_grid.len()).filter(|&k| z_grid[k] <= 1.0 - 2.0 * spec.epsilon).collect();
    let fitted_slope = fit_log_slope(
        &inside.iter().map(|&k| z_grid[k]).collect::<Vec<_>>(),
        &inside.iter().map(|&k| norms[k]).collect::<Vec<_>>(),
    );

    let root = libm::sqrt(2.0 * (mu - lambda));
    let aggregate_d = (1.0 - libm::exp(-root)) / root;
    let branch_mass = slab_mass(u, mesh, Region::Connector, z0, params.aggregate_end);
    let aggregate_bound = aggregate_d * norms[0] * norms[0];
    Ok(DecayReport {
        z_grid,
        norms,
        mu_of_z,
        mu,
        lambda,
        beta,
        envelope,
        fitted_slope,
        bound_violations,
        tol: params.tol,
        aggregate_d,
        branch_mass,
        aggregate_bound,
        aggregate_holds: branch_mass <= aggregate_bound,
    })
}

/// `∫ u²` over `region` triangles clipped to `lo ≤ x₁ ≤ hi`.
fn slab_mass(u: &[f64], mesh: &Mesh, region: Region, lo: f64, hi: f64) -> f64 {
    let mut total = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if mesh.triangle_region[t] != region {
            continue;
        }
        let poly: Vec<(Point, f64)> = tri.iter().map(|&i| (mesh.vertices[i], u[i])).collect();
        let poly = clip(&poly, |p| p.x - lo);
        let poly = clip(&poly, |p| hi - p.x);
        for k in 1..poly.len().saturating_sub(1) {
            let (a, b, c) = (poly[0], poly[k], poly[k + 1]);
            let area = 0.5 * (b.0 - a.0).cross(c.0 - a.0);
            total += p1_square_integral(area.abs(), [a.1, b.1, c.1]);
        }
    }
    total
}

/// Sutherland–Hodgman clip of a convex polygon carrying linear values to
/// `{side ≥ 0}`.
fn clip(poly: &[(Point, f64)], side: impl Fn(Point) -> f64) -> Vec<(Point, f64)> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..n {
        let (p, q) = (poly[k], poly[(k + 1) % n]);
        let (sp, sq) = (side(p.0), side(q.0));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let t = sp / (sp - sq);
            out.push((p.0.lerp(q.0, t), p.1 + t * (q.1 - p.1)));
        }
    }
    out
}
