//! Experiment configuration: one JSON document, every field defaulted,
//! unknown keys rejected.

use std::path::PathBuf;

use dumbbell_core::analysis::{AnalysisParams, DecayParams};
use dumbbell_core::fem::{BoundaryCondition, SolverParams};
use dumbbell_core::geometry::{BumpProfile, DumbbellSpec, ObstacleShape, Point, PolygonDomain};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    fn new(min: [f64; 2], max: [f64; 2]) -> Self {
        Self { min, max }
    }

    fn domain(&self) -> dumbbell_core::Result<PolygonDomain> {
        PolygonDomain::rectangle(Point::new(self.min[0], self.min[1]), Point::new(self.max[0], self.max[1]))
    }
}

/// `"default"` or explicit `[q, value]` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoConfig {
    Named(String),
    Samples(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub omega1: Rect,
    pub omega2: Rect,
    pub xi: f64,
    pub rho: RhoConfig,
    pub epsilons: Vec<f64>,
    pub connector_samples: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            omega1: Rect::new([-3.0, -1.0], [-1.0, 1.0]),
            omega2: Rect::new([1.0, -0.5], [2.0, 0.5]),
            xi: 0.15,
            rho: RhoConfig::Named("default".into()),
            epsilons: vec![0.12, 0.08, 0.05, 0.03],
            connector_samples: DumbbellSpec::DEFAULT_CONNECTOR_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshConfig {
    pub h_max: f64,
    pub min_angle: f64,
    /// Connector element size as a fraction of ε.
    pub connector_factor: f64,
    pub grading: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { h_max: 0.04, min_angle: 20.0, connector_factor: 0.25, grading: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub bc: BoundaryCondition,
    pub k: usize,
    pub tol: f64,
    pub seed: u64,
    pub max_matvecs: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { bc: BoundaryCondition::Dirichlet, k: 4, tol: 1e-9, seed: 0, max_matvecs: 50_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub r1: f64,
    pub r2: f64,
    pub z0: f64,
    pub x0: [f64; 2],
    pub hotspot_tol: f64,
    pub decay_tol: f64,
    pub decay_stations: usize,
    pub aggregate_end: f64,
    /// Absolute nodal noise floor; `null` means `1e-9 · max|ψ₂|`.
    pub noise_floor: Option<f64>,
    pub thresholds: Thresholds,
}

/// Pass limits of the `report`, `obstacle` and `oracle-check` commands.
/// Values at "the smallest ε" refer to the last entry of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Largest Dirichlet mass left on Ω₂ at the smallest ε.
    pub mass_o2: f64,
    /// Largest relative gap between λ₁,ε and λ₁(Ω₁) at the smallest ε.
    pub lambda_rel: f64,
    /// Hot spot acceptance radius δ around `x0`.
    pub hotspot_delta: f64,
    /// Largest relative deep-value deviation at the smallest ε.
    pub alpha_rel: f64,
    /// Slack of `μ₂ ≤ λ₁`.
    pub polya_slack: f64,
    /// Acceptance radius for `d(x0, y_star + D)`.
    pub obstacle_delta: f64,
    /// Oracle-check limits on the unit square.
    pub oracle_rel: f64,
    pub oracle_neumann_rel: f64,
    pub oracle_ratio: [f64; 2],
    pub equivalence_rel: f64,
    pub equivalence_align: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            mass_o2: 0.1,
            lambda_rel: 0.05,
            hotspot_delta: 0.1,
            alpha_rel: 0.1,
            polya_slack: 1e-6,
            obstacle_delta: 0.2,
            oracle_rel: 5e-3,
            oracle_neumann_rel: 1e-2,
            oracle_ratio: [3.0, 5.0],
            equivalence_rel: 1e-7,
            equivalence_align: 1e-6,
        }
    }
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let d = DecayParams::default();
        Self {
            r1: 0.3,
            r2: 0.3,
            z0: d.z0,
            x0: [-2.0, 0.0],
            hotspot_tol: 1e-3,
            decay_tol: d.tol,
            decay_stations: d.stations,
            aggregate_end: d.aggregate_end,
            noise_floor: None,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum ShapeConfig {
    Square {
        side: f64,
    },
    /// Convex counter-clockwise vertex loop.
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementRegion {
    Omega1,
    Domain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObstacleConfig {
    pub shape: ShapeConfig,
    pub spacing: f64,
    /// Minimum gap to the boundary; `null` means `2 · h_max`.
    pub clearance: Option<f64>,
    pub epsilon: f64,
    /// Where grid translates are admitted.
    pub region: PlacementRegion,
}

impl Default for ObstacleConfig {
    fn default() -> Self {
        Self {
            shape: ShapeConfig::Square { side: 0.4 },
            spacing: 0.1,
            clearance: None,
            epsilon: 0.05,
            region: PlacementRegion::Omega1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
    Mesh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), formats: vec![Format::Csv, Format::Json, Format::Svg, Format::Mesh] }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub mesh: MeshConfig,
    pub solver: SolverConfig,
    pub analysis: AnalysisConfig,
    pub obstacle: ObstacleConfig,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    /// Parses and validates; every problem found is listed in the error.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| LabError::Config(vec![e.to_string()]))?;
        let problems = cfg.problems();
        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(LabError::Config(problems))
        }
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Canonical compact JSON, the input of the manifest hash.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        let mut need = |ok: bool, msg: &str| {
            if !ok {
                p.push(msg.to_string());
            }
        };
        let g = &self.geometry;
        need(!g.epsilons.is_empty(), "geometry.epsilons must not be empty");
        need(g.epsilons.iter().all(|&e| e > 0.0 && e < 0.25), "geometry.epsilons must lie in (0, 0.25)");
        need(g.xi > 0.0, "geometry.xi must be positive");
        need(g.connector_samples >= 8, "geometry.connector_samples must be at least 8");
        if let RhoConfig::Named(name) = &g.rho {
            need(name == "default", "geometry.rho must be \"default\" or a list of [q, value] samples");
        }
        need(self.mesh.h_max > 0.0, "mesh.h_max must be positive");
        need((0.0..34.0).contains(&self.mesh.min_angle), "mesh.min_angle must lie in [0, 34)");
        need(self.mesh.connector_factor > 0.0, "mesh.connector_factor must be positive");
        need(self.mesh.grading > 1.0, "mesh.grading must exceed 1");
        need(self.solver.k >= 1, "solver.k must be at least 1");
        need(self.solver.tol > 0.0, "solver.tol must be positive");
        need(self.solver.max_matvecs > 0, "solver.max_matvecs must be positive");
        let a = &self.analysis;
        need(a.r1 > 0.0 && a.r2 > 0.0, "analysis.r1 and analysis.r2 must be positive");
        need((0.0..1.0).contains(&a.hotspot_tol), "analysis.hotspot_tol must lie in [0, 1)");
        need(a.decay_tol >= 0.0, "analysis.decay_tol must be non-negative");
        need(a.decay_stations >= 2, "analysis.decay_stations must be at least 2");
        need(a.noise_floor.is_none_or(|f| f >= 0.0), "analysis.noise_floor must be non-negative");
        let o = &self.obstacle;
        need(o.spacing > 0.0, "obstacle.spacing must be positive");
        need(o.clearance.is_none_or(|c| c >= 0.0), "obstacle.clearance must be non-negative");
        need(o.epsilon > 0.0 && o.epsilon < 0.25, "obstacle.epsilon must lie in (0, 0.25)");
        if let ShapeConfig::Square { side } = o.shape {
            need(side > 0.0, "obstacle.shape.side must be positive");
        }
        if !p.is_empty() {
            return p;
        }
        // deeper checks need well-formed numbers
        for &e in &g.epsilons {
            if let Err(err) = self.spec(e) {
                p.push(format!("geometry at epsilon {e}: {err}"));
            }
        }
        if let Err(err) = self.obstacle_shape() {
            p.push(format!("obstacle.shape: {err}"));
        }
        p
    }

    pub fn rho(&self) -> dumbbell_core::Result<BumpProfile> {
        match &self.geometry.rho {
            RhoConfig::Named(_) => Ok(BumpProfile::default()),
            RhoConfig::Samples(s) => BumpProfile::new(s.clone()),
        }
    }

    pub fn spec(&self, epsilon: f64) -> dumbbell_core::Result<DumbbellSpec> {
        let g = &self.geometry;
        let spec = DumbbellSpec {
            omega1: g.omega1.domain()?,
            omega2: g.omega2.domain()?,
            epsilon,
            xi: g.xi,
            rho: self.rho()?,
            connector_samples: g.connector_samples,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn obstacle_shape(&self) -> dumbbell_core::Result<ObstacleShape> {
        match &self.obstacle.shape {
            ShapeConfig::Square { side } => ObstacleShape::square(*side),
            ShapeConfig::Polygon { vertices } => {
                ObstacleShape::new(vertices.iter().map(|v| Point::new(v[0], v[1])).collect())
            }
        }
    }

    pub fn clearance(&self) -> f64 {
        self.obstacle.clearance.unwrap_or(2.0 * self.mesh.h_max)
    }

    pub fn solver_params(&self, bc_k: Option<usize>) -> SolverParams {
        SolverParams {
            k: bc_k.unwrap_or(self.solver.k),
            tol: self.solver.tol,
            seed: self.solver.seed,
            max_matvecs: self.solver.max_matvecs,
            ..SolverParams::default()
        }
    }

    pub fn analysis_params(&self) -> AnalysisParams {
        let a = &self.analysis;
        AnalysisParams {
            h_max: self.mesh.h_max,
            min_angle_deg: self.mesh.min_angle,
            connector_factor: self.mesh.connector_factor,
            grading: self.mesh.grading,
            tol: self.solver.tol,
            seed: self.solver.seed,
            r1: a.r1,
            r2: a.r2,
            hotspot_tol: a.hotspot_tol,
            x0: Point::new(a.x0[0], a.x0[1]),
            decay: DecayParams {
                z0: a.z0,
                stations: a.decay_stations,
                tol: a.decay_tol,
                aggregate_end: a.aggregate_end,
            },
            noise_floor: a.noise_floor,
        }
    }
}
