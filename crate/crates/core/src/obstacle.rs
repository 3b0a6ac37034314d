//! Grid search over obstacle placements maximizing the Dirichlet ground
//! energy, and a Monte Carlo asymmetry estimate.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fem::{solve_mesh, BoundaryCondition, SolverParams};
use crate::geometry::{subtract_obstacle, DumbbellSpec, ObstacleShape, Point, PolygonDomain};
use crate::mesh::{triangulate_dumbbell, MeshParams};

/// Feasible translates on the lattice `spacing · ℤ²`, ordered by `(y₁, y₂)`.
pub fn placement_grid(
    domain: &PolygonDomain,
    shape: &ObstacleShape,
    spacing: f64,
    clearance: f64,
) -> Result<Vec<Point>> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(invalid("spacing", "must be positive"));
    }
    let bb = domain.bbox();
    let (i0, i1) = (libm::ceil(bb.min.x / spacing) as i64, libm::floor(bb.max.x / spacing) as i64);
    let (j0, j1) = (libm::ceil(bb.min.y / spacing) as i64, libm::floor(bb.max.y / spacing) as i64);
    let mut out = Vec::new();
    for i in i0..=i1 {
        for j in j0..=j1 {
            let y = Point::new(i as f64 * spacing, j as f64 * spacing);
            if subtract_obstacle(domain, shape, y, clearance).is_ok() {
                out.push(y);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyPlacementSet);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementResult {
    pub y: Point,
    pub feasible: bool,
    pub lambda1: Option<f64>,
    pub n_tri: usize,
    pub residual: Option<f64>,
    /// Failure message of an infeasible or unsolved placement.
    pub error: Option<String>,
}

/// Perforates `Ω_ε` at `y`, re-meshes and solves for the Dirichlet ground
/// energy. Failures are recorded, not returned.
pub fn evaluate_placement(
    spec: &DumbbellSpec,
    domain: &PolygonDomain,
    shape: &ObstacleShape,
    y: Point,
    clearance: f64,
    mesh: &MeshParams,
    solver: &SolverParams,
) -> PlacementResult {
    let failed = |feasible, e: Error| PlacementResult {
        y,
        feasible,
        lambda1: None,
        n_tri: 0,
        residual: None,
        error: Some(e.to_string()),
    };
    let perforated = match subtract_obstacle(domain, shape, y, clearance) {
        Ok(d) => d,
        Err(e) => return failed(false, e),
    };
    let m = match triangulate_dumbbell(spec, Some(&perforated), mesh) {
        Ok(m) => m,
        Err(e) => return failed(true, e),
    };
    let solver = SolverParams { k: 1, ..solver.clone() };
    match solve_mesh(&m, BoundaryCondition::Dirichlet, &solver) {
        Ok(r) => PlacementResult {
            y,
            feasible: true,
            lambda1: Some(r.pairs[0].lambda),
            n_tri: m.n_triangles(),
            residual: Some(r.residuals[0]),
            error: None,
        },
        Err(e) => PlacementResult { n_tri: m.n_triangles(), ..failed(true, e) },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSweepResult {
    pub placements: Vec<PlacementResult>,
    /// Unperforated `λ₁(Ω_ε)`.
    pub baseline_lambda1: f64,
    pub y_star: Point,
    pub lambda_star: f64,
    /// `d(x₀, y_star + D)`.
    pub dist_to_x0: f64,
    /// `lambda_star / baseline_lambda1`.
    pub largeness_ratio: f64,
    /// Other placements whose λ₁ equals `lambda_star` to 1e-9 relative.
    pub ties: Vec<Point>,
    /// Whether every solved placement lies strictly above the baseline.
    pub all_above_baseline: bool,
}

/// Picks the best placement; ties go to the smallest `d(x₀, y + D)`, then
/// to grid order.
pub fn summarize(
    placements: Vec<PlacementResult>,
    baseline_lambda1: f64,
    shape: &ObstacleShape,
    x0: Point,
) -> Result<ObstacleSweepResult> {
    let solved: Vec<(usize, f64)> =
        placements.iter().enumerate().filter_map(|(i, p)| p.lambda1.map(|l| (i, l))).collect();
    let top = solved.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    if solved.is_empty() {
        return Err(Error::EmptyPlacementSet);
    }
    let near_top: Vec<usize> = solved.iter().filter(|s| s.1 >= top - 1e-9 * top.abs()).map(|s| s.0).collect();
    let best = *near_top
        .iter()
        .min_by(|&&a, &&b| {
            shape.distance(placements[a].y, x0).total_cmp(&shape.distance(placements[b].y, x0)).then(a.cmp(&b))
        })
        .expect("near_top holds the maximum");
    let y_star = placements[best].y;
    let lambda_star = placements[best].lambda1.expect("solved placement");
    let ties = near_top.iter().filter(|&&i| i != best).map(|&i| placements[i].y).collect();
    let all_above_baseline = solved.iter().all(|s| s.1 > baseline_lambda1);
    Ok(ObstacleSweepResult {
        dist_to_x0: shape.distance(y_star, x0),
        largeness_ratio: lambda_star / baseline_lambda1,
        placements,
        baseline_lambda1,
        y_star,
        lambda_star,
        ties,
        all_above_baseline,
    })
}

/// Sequential sweep over `grid`.
pub fn sweep(
    spec: &DumbbellSpec,
    shape: &ObstacleShape,
    grid: &[Point],
    clearance: f64,
    x0: Point,
    mesh: &MeshParams,
    solver: &SolverParams,
) -> Result<ObstacleSweepResult> {
    let domain = spec.build()?;
    let base_mesh = triangulate_dumbbell(spec, Some(&domain), mesh)?;
    let baseline = solve_mesh(&base_mesh, BoundaryCondition::Dirichlet, &SolverParams { k: 1, ..solver.clone() })?;
    let placements =
        grid.iter().map(|&y| evaluate_placement(spec, &domain, shape, y, clearance, mesh, solver)).collect();
    summarize(placements, baseline.pairs[0].lambda, shape, x0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryEstimate {
    /// Smallest sampled `Vol(B(x, r) \ Ω) / Vol(B(x, r))`.
    pub alpha: f64,
    /// Binomial standard error of the minimizing sample.
    pub standard_error: f64,
    pub worst_point: Point,
    pub worst_radius: f64,
    pub boundary_samples: usize,
    pub volume_samples: usize,
}

/// Outside fraction of the disk `B(x, r)` from `n` uniform samples.
pub fn outside_fraction(domain: &PolygonDomain, x: Point, r: f64, n: usize, rng: &mut impl Rng) -> f64 {
    let mut outside = 0usize;
    for _ in 0..n {
        // uniform in the disk by the square-root radius transform
        let rho = r * libm::sqrt(rng.random::<f64>());
        let t = 2.0 * PI * rng.random::<f64>();
        let p = Point::new(x.x + rho * libm::cos(t), x.y + rho * libm::sin(t));
        if !domain.contains(p) {
            outside += 1;
        }
    }
    outside as f64 / n as f64
}

/// Monte Carlo estimate of the asymmetry constant over boundary points
/// sampled uniformly by arc length.
pub fn estimate_asymmetry(
    domain: &PolygonDomain,
    radii: &[f64],
    n_boundary_samples: usize,
    n_volume_samples: usize,
    seed: u64,
) -> Result<AsymmetryEstimate> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(invalid("radii", "need at least one positive radius"));
    }
    if n_boundary_samples < 100 || n_volume_samples < 100 {
        return Err(invalid("samples", "sample counts must be at least 100"));
    }
    let edges: Vec<(Point, Point)> = domain.edges().map(|(a, b, _)| (a, b)).collect();
    let mut cumulative = Vec::with_capacity(edges.len());
    let mut total = 0.0;
    for (a, b) in &edges {
        total += a.dist(*b);
        cumulative.push(total);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (f64::INFINITY, Point::default(), radii[0]);
    for _ in 0..n_boundary_samples {
        let s = total * rng.random::<f64>();
        let k = cumulative.partition_point(|&c| c < s).min(edges.len() - 1);
        let start = if k == 0 { 0.0 } else { cumulative[k - 1] };
        let (a, b) = edges[k];
        let x = a.lerp(b, (s - start) / a.dist(b));
        for &r in radii {
            let f = outside_fraction(domain, x, r, n_volume_samples, &mut rng);
            if f < best.0 {
                best = (f, x, r);
            }
        }
    }
    let (alpha, worst_point, worst_radius) = best;
    Ok(AsymmetryEstimate {
        alpha,
        standard_error: libm::sqrt(alpha * (1.0 - alpha) / n_volume_samples as f64),
        worst_point,
        worst_radius,
        boundary_samples: n_boundary_samples,
        volume_samples: n_volume_samples,
    })
}
