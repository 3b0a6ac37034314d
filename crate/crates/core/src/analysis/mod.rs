//! Diagnostics on computed eigenfunctions: localization, hot spots, nodal
//! lines, cross-section decay and the ε-sweep record.

mod decay;
mod nodal;
mod sweep;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{DumbbellSpec, Point, Region};
use crate::mesh::Mesh;

pub use decay::{cross_section_norm, decay_check, fit_log_slope, DecayParams, DecayReport};
pub use nodal::{nodal_containment, nodal_set, ContainmentReport, EndKind, NodalPath, NodalPolyline};
pub use sweep::{evaluate_epsilon, AnalysisParams, EpsilonOutcome, EpsilonReport, NodalSummary, SweepRow};

/// Exact `∫ u²` of a linear function with corner values `u` over a
/// triangle of the given area.
pub(crate) fn p1_square_integral(area: f64, u: [f64; 3]) -> f64 {
    let [a, b, c] = u;
    area / 6.0 * (a * a + b * b + c * c + a * b + b * c + c * a)
}

/// `‖u‖²` over triangles whose centroid lies in `region`.
pub fn region_mass(u: &[f64], mesh: &Mesh, region: Region) -> Result<f64> {
    check_len(u, mesh)?;
    let mut found = false;
    let mut mass = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if mesh.triangle_region[t] == region {
            found = true;
            mass += p1_square_integral(mesh.triangle_area(t), tri.map(|i| u[i]));
        }
    }
    if !found {
        return Err(Error::EmptyRegion(region));
    }
    Ok(mass)
}

/// Masses of every region that owns at least one triangle.
pub fn region_masses(u: &[f64], mesh: &Mesh) -> Result<BTreeMap<Region, f64>> {
    check_len(u, mesh)?;
    let mut out = BTreeMap::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        *out.entry(mesh.triangle_region[t]).or_insert(0.0) +=
            p1_square_integral(mesh.triangle_area(t), tri.map(|i| u[i]));
    }
    Ok(out)
}

fn check_len(u: &[f64], mesh: &Mesh) -> Result<()> {
    if u.len() != mesh.n_vertices() || mesh.triangle_region.len() != mesh.n_triangles() {
        return Err(invalid("u", "length does not match the mesh"));
    }
    Ok(())
}

/// Limit coefficients `(α₁, α₂)` of the second Neumann eigenfunction on the
/// base domains.
pub fn neumann_coefficients(area1: f64, area2: f64) -> Result<(f64, f64)> {
    if !(area1 > 0.0 && area2 > 0.0) {
        return Err(invalid("area", "base domain areas must be positive"));
    }
    let total = area1 + area2;
    Ok((-libm::sqrt(area2 / total), libm::sqrt(area1 / total)))
}

/// Margin from the connector below which vertices are not "deep".
pub fn deep_margin(h_max: f64, r: f64) -> f64 {
    (2.0 * h_max).max(0.5 * r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub masses: BTreeMap<Region, f64>,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Mean of `u` over deep vertices of Ω₁ and Ω₂.
    pub deep_values: [f64; 2],
    /// `α_i/√|Ω_i|`.
    pub targets: [f64; 2],
    /// `|deep_value_i − target_i|`.
    pub deviations: [f64; 2],
    /// Deviations divided by `|target_i|`.
    pub relative_deviations: [f64; 2],
}

/// Region masses and deep values of `u` against the Neumann limit profile.
/// `margins[i]` is the minimum distance from the connector for Ω_i
/// vertices to count as deep.
pub fn localization(u: &[f64], mesh: &Mesh, spec: &DumbbellSpec, margins: [f64; 2]) -> Result<LocalizationReport> {
    let masses = region_masses(u, mesh)?;
    let (area1, area2) = (spec.area_omega1(), spec.area_omega2());
    let (alpha1, alpha2) = neumann_coefficients(area1, area2)?;
    let connector = spec.connector()?;
    let mut deep_values = [0.0; 2];
    for (k, region) in [Region::Omega1, Region::Omega2].into_iter().enumerate() {
        let (sum, count) = mesh
            .vertices
            .iter()
            .zip(&mesh.vertex_region)
            .zip(u)
            .filter(|((p, r), _)| **r == region && connector.distance(**p) >= margins[k])
            .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
        if count == 0 {
            return Err(Error::EmptyRegion(region));
        }
        deep_values[k] = sum / count as f64;
    }
    let targets = [alpha1 / libm::sqrt(area1), alpha2 / libm::sqrt(area2)];
    let deviations = [(deep_values[0] - targets[0]).abs(), (deep_values[1] - targets[1]).abs()];
    let relative_deviations = [deviations[0] / targets[0].abs(), deviations[1] / targets[1].abs()];
    Ok(LocalizationReport { masses, alpha1, alpha2, deep_values, targets, deviations, relative_deviations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotSpotReport {
    pub max_value: f64,
    /// Vertices with `u ≥ (1 − tol_rel)·max`.
    pub argmax_set: Vec<usize>,
    pub argmax_points: Vec<Point>,
    pub reference: Point,
    /// Minimum distance from the argmax set to `reference`.
    pub distance: f64,
    pub tol_rel: f64,
    /// Length scale `1/√λ₁` of the inner radius estimate in two dimensions.
    pub inner_radius_diag: f64,
}

/// Near-maximal vertices of a positive ground state.
pub fn hot_spots(u: &[f64], mesh: &Mesh, lambda1: f64, tol_rel: f64, reference: Point) -> Result<HotSpotReport> {
    if u.len() != mesh.n_vertices() || u.is_empty() {
        return Err(invalid("u", "length does not match the mesh"));
    }
    if !(0.0..1.0).contains(&tol_rel) {
        return Err(invalid("tol_rel", "must lie in [0, 1)"));
    }
    let max_value = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cut = (1.0 - tol_rel) * max_value;
    let argmax_set: Vec<usize> = (0..u.len()).filter(|&i| u[i] >= cut).collect();
    let argmax_points: Vec<Point> = argmax_set.iter().map(|&i| mesh.vertices[i]).collect();
    let distance = argmax_points.iter().map(|p| p.dist(reference)).fold(f64::INFINITY, f64::min);
    Ok(HotSpotReport {
        max_value,
        argmax_set,
        argmax_points,
        reference,
        distance,
        tol_rel,
        inner_radius_diag: 1.0 / libm::sqrt(lambda1),
    })
}

/// `sup |u|` over vertices tagged Ω₂.
pub fn check_vanishing_on_omega2(u: &[f64], mesh: &Mesh) -> f64 {
    u.iter().zip(&mesh.vertex_region).filter(|(_, r)| **r == Region::Omega2).map(|(v, _)| v.abs()).fold(0.0, f64::max)
}
