use dumbbell_core::analysis::AnalysisParams;
use dumbbell_core::fem::{solve_mesh, BoundaryCondition, SolverParams};
use dumbbell_core::geometry::{DumbbellSpec, ObstacleShape, Point};
use dumbbell_core::mesh::triangulate_dumbbell;
use dumbbell_core::obstacle::{evaluate_placement, placement_grid, summarize, PlacementResult};

struct Setup {
    spec: DumbbellSpec,
    shape: ObstacleShape,
    params: AnalysisParams,
}

impl Setup {
    fn new() -> Self {
        Setup {
            spec: DumbbellSpec::default_rectangles(0.05).unwrap(),
            shape: ObstacleShape::square(0.4).unwrap(),
            params: AnalysisParams::default(),
        }
    }

    fn at(&self, x: f64, y: f64) -> PlacementResult {
        let domain = self.spec.build().unwrap();
        let mesh = self.params.mesh_params(&self.spec);
        evaluate_placement(&self.spec, &domain, &self.shape, Point::new(x, y), 0.08, &mesh, &SolverParams::default())
    }

    fn baseline(&self) -> f64 {
        let mesh = triangulate_dumbbell(&self.spec, None, &self.params.mesh_params(&self.spec)).unwrap();
        solve_mesh(&mesh, BoundaryCondition::Dirichlet, &SolverParams::with_k(1)).unwrap().pairs[0].lambda
    }
}

#[test]
fn perforating_the_hot_spot_beats_perforating_the_small_bulb() {
    let s = Setup::new();
    let base = s.baseline();
    let hot = s.at(-2.0, 0.0).lambda1.unwrap();
    let small = s.at(1.5, 0.0).lambda1.unwrap();
    assert!(hot > small, "{hot} vs {small}");
    assert!(hot > base);
    // Ω₂ carries almost no ground-state mass, so a hole there barely moves λ₁
    assert!((small - base).abs() < 1e-6 * base, "{small} vs {base}");
}

#[test]
fn landscape_is_mirror_symmetric() {
    let s = Setup::new();
    for (x, y) in [(-2.5, 0.5), (-1.6, 0.3), (-2.2, 0.7)] {
        let up = s.at(x, y).lambda1.unwrap();
        let down = s.at(x, -y).lambda1.unwrap();
        assert!((up - down).abs() <= 1e-3 * up, "({x}, {y}): {up} vs {down}");
    }
}

#[test]
fn coarse_grid_sweep_finds_the_centre() {
    let s = Setup::new();
    let grid = placement_grid(&s.spec.omega1, &s.shape, 0.5, 0.08).unwrap();
    assert_eq!(grid.len(), 9);
    let placements: Vec<PlacementResult> = grid.iter().map(|y| s.at(y.x, y.y)).collect();
    let r = summarize(placements, s.baseline(), &s.shape, Point::new(-2.0, 0.0)).unwrap();
    assert_eq!(r.y_star, Point::new(-2.0, 0.0));
    assert_eq!(r.dist_to_x0, 0.0);
    assert!(r.all_above_baseline);
    assert!(r.largeness_ratio > 2.0, "{}", r.largeness_ratio);
}

#[test]
fn placements_touching_the_boundary_are_infeasible() {
    let s = Setup::new();
    let r = s.at(-1.05, 0.0);
    assert!(!r.feasible && r.lambda1.is_none() && r.error.is_some());
}
