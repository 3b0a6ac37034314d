use std::sync::OnceLock;

use dumbbell_core::analysis::{evaluate_epsilon, hot_spots, nodal_set, AnalysisParams, EpsilonReport, SweepRow};
use dumbbell_core::fem::{fix_sign, solve_mesh, BoundaryCondition, SignConvention, SolverParams};
use dumbbell_core::geometry::{DumbbellSpec, Point, PolygonDomain};
use dumbbell_core::mesh::{triangulate, MeshParams};

const SWEEP: [f64; 4] = [0.12, 0.08, 0.05, 0.03];

fn sweep() -> &'static [EpsilonReport] {
    static S: OnceLock<Vec<EpsilonReport>> = OnceLock::new();
    S.get_or_init(|| {
        let params = AnalysisParams::default();
        SWEEP
            .iter()
            .map(|&e| evaluate_epsilon(&DumbbellSpec::default_rectangles(e).unwrap(), &params).unwrap().report)
            .collect()
    })
}

fn column(f: impl Fn(&EpsilonReport) -> f64) -> Vec<f64> {
    sweep().iter().map(f).collect()
}

fn decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

#[test]
fn dirichlet_mass_leaves_the_small_bulb() {
    let rows: Vec<SweepRow> = sweep().iter().map(SweepRow::from).collect();
    let o2: Vec<f64> = rows.iter().map(|r| r.mass_o2).collect();
    assert!(decreasing(&o2), "{o2:?}");
    for r in &rows {
        assert!(r.mass_o1 > r.mass_o2);
        assert!((r.mass_o1 + r.mass_o2 + r.mass_conn - 1.0).abs() < 1e-8);
    }
    let sup = column(|r| r.sup_o2);
    assert!(decreasing(&sup), "{sup:?}");
    assert!(sup[3] * 2.0 < sup[0]);
}

#[test]
fn hot_spot_sits_at_the_centre_of_the_large_bulb() {
    let d = column(|r| r.hot_spot.distance);
    assert!(d.windows(2).all(|w| w[1] <= w[0]), "{d:?}");
    assert!(d[3] <= 0.1);
}

#[test]
fn rectangle_alone_peaks_at_its_centre() {
    let dom = PolygonDomain::rectangle(Point::new(-3.0, -1.0), Point::new(-1.0, 1.0)).unwrap();
    let mesh = triangulate(&dom, &MeshParams::uniform(0.04)).unwrap();
    let r = solve_mesh(&mesh, BoundaryCondition::Dirichlet, &SolverParams::with_k(1)).unwrap();
    let r = fix_sign(r, SignConvention::GroundStatePositive).unwrap();
    let h = hot_spots(&r.pairs[0].u, &mesh, r.pairs[0].lambda, 0.0, Point::new(-2.0, 0.0)).unwrap();
    assert!(h.distance <= 0.04, "{}", h.distance);
}

#[test]
fn neumann_second_mode_trends() {
    let mu = column(|r| r.mu[1]);
    assert!(decreasing(&mu) && mu[3] > 0.0, "{mu:?}");
    for k in 0..2 {
        let dev = column(|r| r.neumann.relative_deviations[k]);
        assert!(decreasing(&dev), "{dev:?}");
        assert!(dev[3] <= 0.1);
    }
    for r in sweep() {
        let [a1, a2] = [r.neumann.alpha1, r.neumann.alpha2];
        assert!((a1 * a1 + a2 * a2 - 1.0).abs() < 1e-14);
        assert!(r.mu[1] <= r.lambda1 + 1e-6);
    }
}

#[test]
fn nodal_line_crosses_the_connector_once() {
    for r in sweep() {
        assert_eq!((r.nodal.boundary_intersections, r.nodal.closed_components), (2, 0), "eps {}", r.eps);
    }
    assert!(sweep()[3].nodal.containment.contained);
}

#[test]
fn unit_square_neumann_nodal_line_is_a_midline() {
    let dom = PolygonDomain::rectangle(Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap();
    let mesh = triangulate(&dom, &MeshParams::uniform(0.05)).unwrap();
    let r = solve_mesh(&mesh, BoundaryCondition::Neumann, &SolverParams::with_k(2)).unwrap();
    let path = nodal_set(&r.pairs[1].u, &mesh, None).unwrap();
    assert_eq!((path.boundary_intersections, path.closed_components), (2, 0));
    // the discrete pair picks some direction in the π² eigenspace; only
    // its midline through the centre is determined
    for c in &path.components {
        let mid =
            c.points.iter().map(|p| ((p.x - 0.5).powi(2) + (p.y - 0.5).powi(2)).sqrt()).fold(f64::INFINITY, f64::min);
        assert!(mid < 0.05, "{mid}");
    }
}

#[test]
fn connector_decay_is_exponential() {
    for r in sweep() {
        let d = r.decay.as_ref().expect("hypothesis holds on the default sweep");
        assert_eq!(d.bound_violations, 0, "eps {}", r.eps);
        assert!(d.aggregate_holds, "eps {}", r.eps);
        assert!(d.lambda < d.mu);
        assert!(d.fitted_slope.is_some_and(|s| s < 0.0));
    }
    let lambda = column(|r| r.lambda1);
    assert!(lambda.windows(2).all(|w| w[1] > w[0]));
    let limit = std::f64::consts::PI.powi(2) / 2.0;
    assert!(lambda.iter().all(|&l| l < limit));
    assert!((limit - lambda[3]) / limit <= 0.05);
}
