use dumbbell_core::geometry::{subregions, DumbbellSpec, Point};
use dumbbell_core::mesh::{mesh_quality, triangle_angles, triangulate_dumbbell, MeshParams, SizeField};
use dumbbell_core::Region;

fn spec(eps: f64) -> DumbbellSpec {
    DumbbellSpec::default_rectangles(eps).unwrap()
}

#[test]
fn dumbbell_polygon_area_and_regions() {
    let s = spec(0.05);
    let d = s.build().unwrap();
    let conn = d.area() - 5.0;
    assert!(conn > 4.0 * 0.05 && conn < 8.0 * 0.05, "{conn}");
    assert_eq!(s.classify_point(Point::new(-2.0, 0.0)), Region::Omega1);
    assert_eq!(s.classify_point(Point::new(0.0, 0.0)), Region::Connector);
    assert_eq!(s.classify_point(Point::new(0.0, 3.0)), Region::Outside);
    assert!((s.half_width(-1.0) - 0.1).abs() < 1e-15);
    assert!((s.half_width(0.0) - 0.05).abs() < 1e-15);
}

#[test]
fn trimmed_base_area() {
    let layout = subregions(&spec(0.05), 0.3, 0.3).unwrap();
    let want = 4.0 - std::f64::consts::PI * 0.09 / 2.0;
    assert!((layout.omega1_prime.area() - want).abs() < 1e-3, "{}", layout.omega1_prime.area());
    assert!(subregions(&spec(0.05), 1.5, 0.3).is_err());
    assert!(subregions(&spec(0.05), 0.0, 0.3).is_err());
}

#[test]
fn connector_is_resolved_across_its_width() {
    let s = spec(0.05);
    let params = MeshParams { h_max: 0.04, min_angle_deg: 20.0, size_field: SizeField::connector(&s, 0.25, 1.5) };
    let mesh = triangulate_dumbbell(&s, None, &params).unwrap();
    for k in 0..41 {
        let z = -1.0 + 2.0 * k as f64 / 40.0 + 1e-7;
        let crossings = mesh
            .edge_counts()
            .keys()
            .filter(|&&(a, b)| (mesh.vertices[a].x - z) * (mesh.vertices[b].x - z) < 0.0)
            .count();
        assert!(crossings >= 4, "x = {z}: {crossings} crossings");
    }
    let q = mesh_quality(&mesh);
    let brute = (0..mesh.n_triangles())
        .flat_map(|t| {
            let [a, b, c] = mesh.corners(t);
            triangle_angles(a, b, c)
        })
        .fold(f64::INFINITY, f64::min);
    assert!((q.min_angle_deg - brute).abs() < 1e-12);
    assert!(q.min_angle_deg >= 20.0);
    assert_eq!(mesh.holes, 0);
    assert!((mesh.area() - s.build().unwrap().area()).abs() < 1e-9);
}
