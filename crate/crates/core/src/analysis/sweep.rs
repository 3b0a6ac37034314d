use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{
    check_vanishing_on_omega2, decay_check, deep_margin, hot_spots, localization, nodal_containment, nodal_set,
    region_masses, ContainmentReport, DecayParams, DecayReport, HotSpotReport, LocalizationReport,
};
use crate::error::{Error, Result};
use crate::fem::{fix_sign, solve_mesh, BoundaryCondition, EigenResult, SignConvention, SolverParams};
use crate::geometry::{subregions, DumbbellSpec, Point, Region};
use crate::mesh::{mesh_quality, triangulate_dumbbell, Mesh, MeshParams, SizeField};

/// Everything needed to evaluate one member of the ε-sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisParams {
    pub h_max: f64,
    pub min_angle_deg: f64,
    /// Connector element size as a fraction of ε.
    pub connector_factor: f64,
    pub grading: f64,
    pub tol: f64,
    pub seed: u64,
    pub r1: f64,
    pub r2: f64,
    pub hotspot_tol: f64,
    pub x0: Point,
    pub decay: DecayParams,
    /// Nodal noise floor; `None` means `1e-9 · max|ψ₂|`.
    pub noise_floor: Option<f64>,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            h_max: 0.04,
            min_angle_deg: 20.0,
            connector_factor: 0.25,
            grading: 1.5,
            tol: 1e-9,
            seed: 0,
            r1: 0.3,
            r2: 0.3,
            hotspot_tol: 1e-3,
            x0: Point::new(-2.0, 0.0),
            decay: DecayParams::default(),
            noise_floor: None,
        }
    }
}

impl AnalysisParams {
    pub fn mesh_params(&self, spec: &DumbbellSpec) -> MeshParams {
        MeshParams {
            h_max: self.h_max,
            min_angle_deg: self.min_angle_deg,
            size_field: SizeField::connector(spec, self.connector_factor, self.grading),
        }
    }

    fn solver(&self, k: usize) -> SolverParams {
        SolverParams { k, tol: self.tol, seed: self.seed, ..SolverParams::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalSummary {
    pub boundary_intersections: usize,
    pub closed_components: usize,
    pub components: usize,
    pub containment: ContainmentReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonReport {
    pub eps: f64,
    pub n_vertices: usize,
    pub n_triangles: usize,
    pub min_angle_deg: f64,
    pub lambda1: f64,
    pub dirichlet_residual: f64,
    pub dirichlet_masses: alloc::collections::BTreeMap<Region, f64>,
    pub hot_spot: HotSpotReport,
    pub sup_o2: f64,
    pub mu: [f64; 2],
    pub neumann_residuals: Vec<f64>,
    pub neumann: LocalizationReport,
    pub nodal: NodalSummary,
    /// `Err` carries the message when the decay hypothesis fails.
    pub decay: core::result::Result<DecayReport, String>,
    pub polya_holds: bool,
}

/// Report plus the fields it was computed from.
#[derive(Debug, Clone)]
pub struct EpsilonOutcome {
    pub report: EpsilonReport,
    pub mesh: Mesh,
    pub dirichlet: EigenResult,
    pub neumann: EigenResult,
}

/// Meshes `Ω_ε`, solves both boundary problems and runs every diagnostic.
pub fn evaluate_epsilon(spec: &DumbbellSpec, params: &AnalysisParams) -> Result<EpsilonOutcome> {
    let mesh = triangulate_dumbbell(spec, None, &params.mesh_params(spec))?;
    let quality = mesh_quality(&mesh);

    let dirichlet = solve_mesh(&mesh, BoundaryCondition::Dirichlet, &params.solver(1))?;
    let dirichlet = fix_sign(dirichlet, SignConvention::GroundStatePositive)?;
    let phi = &dirichlet.pairs[0].u;
    let lambda1 = dirichlet.pairs[0].lambda;
    let dirichlet_masses = region_masses(phi, &mesh)?;
    let hot_spot = hot_spots(phi, &mesh, lambda1, params.hotspot_tol, params.x0)?;
    let sup_o2 = check_vanishing_on_omega2(phi, &mesh);
    let decay = match decay_check(phi, &mesh, spec, lambda1, &params.decay) {
        Ok(r) => Ok(r),
        Err(e @ Error::InapplicableHypothesis { .. }) => Err(e.to_string()),
        Err(e) => return Err(e),
    };

    let neumann = solve_mesh(&mesh, BoundaryCondition::Neumann, &params.solver(2))?;
    let neumann = fix_sign(neumann, SignConvention::Neumann2NegativeOnOmega1 { regions: &mesh.vertex_region })?;
    let psi = &neumann.pairs[1].u;
    let margins = [deep_margin(params.h_max, params.r1), deep_margin(params.h_max, params.r2)];
    let neumann_loc = localization(psi, &mesh, spec, margins)?;
    let path = nodal_set(psi, &mesh, params.noise_floor)?;
    let layout = subregions(spec, params.r1, params.r2)?;
    let containment = nodal_containment(&path, &layout, spec)?;
    let mu = [neumann.pairs[0].lambda, neumann.pairs[1].lambda];

    let report = EpsilonReport {
        eps: spec.epsilon,
        n_vertices: mesh.n_vertices(),
        n_triangles: mesh.n_triangles(),
        min_angle_deg: quality.min_angle_deg,
        lambda1,
        dirichlet_residual: dirichlet.residuals[0],
        dirichlet_masses,
        hot_spot,
        sup_o2,
        mu,
        neumann_residuals: neumann.residuals.clone(),
        neumann: neumann_loc,
        nodal: NodalSummary {
            boundary_intersections: path.boundary_intersections,
            closed_components: path.closed_components,
            components: path.components.len(),
            containment,
        },
        decay,
        polya_holds: mu[1] <= lambda1 + 1e-6,
    };
    Ok(EpsilonOutcome { report, mesh, dirichlet, neumann })
}

/// One CSV row of the sweep summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub lambda1: f64,
    pub mass_o1: f64,
    pub mass_o2: f64,
    pub mass_conn: f64,
    pub hotspot_dist: f64,
    pub sup_o2: f64,
    pub mu2: f64,
    /// Relative deviations of the deep values.
    pub alpha_dev1: f64,
    pub alpha_dev2: f64,
    pub nodal_contained: bool,
    /// `None` when the decay hypothesis does not hold.
    pub decay_violations: Option<usize>,
}

impl From<&EpsilonReport> for SweepRow {
    fn from(r: &EpsilonReport) -> Self {
        let mass = |g: Region| r.dirichlet_masses.get(&g).copied().unwrap_or(0.0);
        SweepRow {
            eps: r.eps,
            lambda1: r.lambda1,
            mass_o1: mass(Region::Omega1),
            mass_o2: mass(Region::Omega2),
            mass_conn: mass(Region::Connector),
            hotspot_dist: r.hot_spot.distance,
            sup_o2: r.sup_o2,
            mu2: r.mu[1],
            alpha_dev1: r.neumann.relative_deviations[0],
            alpha_dev2: r.neumann.relative_deviations[1],
            nodal_contained: r.nodal.containment.contained,
            decay_violations: r.decay.as_ref().ok().map(|d| d.bound_violations),
        }
    }
}
