use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{BBox, BumpProfile, EdgeMarker, Point, PolygonDomain, Region};
use crate::error::{invalid, Error, Result};

/// Tolerance for recognising the flat seam edges on `x₁ = ∓1`.
const SEAM_TOL: f64 = 1e-12;

/// Two base polygons joined along `x₁ ∈ [-1, 1]` by a connector of
/// half-width `ε` whose ends flare to `2ε` following the bump profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumbbellSpec {
    pub omega1: PolygonDomain,
    pub omega2: PolygonDomain,
    pub epsilon: f64,
    pub xi: f64,
    #[serde(default)]
    pub rho: BumpProfile,
    pub connector_samples: usize,
}

impl DumbbellSpec {
    pub const DEFAULT_CONNECTOR_SAMPLES: usize = 32;

    /// `Ω₁ = [-3,-1]×[-1,1]`, `Ω₂ = [1,2]×[-0.5,0.5]`, `ξ = 0.15`.
    pub fn default_rectangles(epsilon: f64) -> Result<Self> {
        let spec = Self {
            omega1: PolygonDomain::rectangle(Point::new(-3.0, -1.0), Point::new(-1.0, 1.0))?,
            omega2: PolygonDomain::rectangle(Point::new(1.0, -0.5), Point::new(2.0, 0.5))?,
            epsilon,
            xi: 0.15,
            rho: BumpProfile::default(),
            connector_samples: Self::DEFAULT_CONNECTOR_SAMPLES,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        let spec = Self { epsilon, ..self.clone() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("must be positive, got {}", self.epsilon)));
        }
        if !(self.xi > 0.0 && self.xi.is_finite()) {
            return Err(invalid("xi", format!("must be positive, got {}", self.xi)));
        }
        if 2.0 * self.epsilon >= 3.0 * self.xi {
            return Err(invalid(
                "epsilon",
                format!("connector half-width 2*eps = {} must be below 3*xi = {}", 2.0 * self.epsilon, 3.0 * self.xi),
            ));
        }
        if self.connector_samples < 8 {
            return Err(invalid("connector_samples", "must be at least 8"));
        }
        self.omega1.validate()?;
        self.omega2.validate()?;
        for (name, dom, side) in [("omega1", &self.omega1, -1.0), ("omega2", &self.omega2, 1.0)] {
            let bad = dom.rings.iter().flatten().any(|p| if side < 0.0 { p.x > -1.0 } else { p.x < 1.0 });
            if bad {
                return Err(Error::Stitching(format!("{name} crosses x1 = {side}")));
            }
        }
        Ok(())
    }

    /// Upper boundary of the (polyline) connector at abscissa `x ∈ [-1, 1]`.
    ///
    /// The curved ends are interpolated linearly between the sampled profile
    /// points, so membership tests agree exactly with the meshed polygon.
    pub fn half_width(&self, x: f64) -> f64 {
        let eps = self.epsilon;
        let x = x.clamp(-1.0, 1.0);
        let s = x.abs();
        if s <= 1.0 - 2.0 * eps {
            return eps;
        }
        // distance from the seam, measured inward
        let d = 1.0 - s;
        let n = self.connector_samples - 1;
        let step = 2.0 * eps / n as f64;
        let k = ((d / step) as usize).min(n - 1);
        let half = |j: usize| eps * self.rho.value(-(j as f64 * step) / eps);
        let t = (d - k as f64 * step) / step;
        half(k) * (1.0 - t) + half(k + 1) * t
    }

    pub fn connector(&self) -> Result<PolygonDomain> {
        build_connector(self.epsilon, &self.rho, self.connector_samples)
    }

    pub fn connector_bbox(&self) -> BBox {
        BBox { min: Point::new(-1.0, -2.0 * self.epsilon), max: Point::new(1.0, 2.0 * self.epsilon) }
    }

    /// Region of a point. Boundary points on the seams `x₁ = ∓1` below the
    /// flare height resolve to the connector.
    pub fn classify_point(&self, p: Point) -> Region {
        if (-1.0..=1.0).contains(&p.x) && p.y.abs() <= self.half_width(p.x) {
            Region::Connector
        } else if self.omega1.contains_closed(p, SEAM_TOL) {
            Region::Omega1
        } else if self.omega2.contains_closed(p, SEAM_TOL) {
            Region::Omega2
        } else {
            Region::Outside
        }
    }

    /// Stitches `Ω₁ ∪ Q_ε ∪ Ω₂` into one simple polygon.
    pub fn build(&self) -> Result<PolygonDomain> {
        self.validate()?;
        let eps = self.epsilon;
        let reach = 3.0 * self.xi;
        let (o1, m1) = (&self.omega1.rings[0], &self.omega1.markers[0]);
        let (o2, m2) = (&self.omega2.rings[0], &self.omega2.markers[0]);

        // Ω₁ is CCW and lies left of x₁ = -1, so its seam edge runs upward.
        let i = find_seam(o1, -1.0, true, reach, eps).ok_or_else(|| {
            Error::Stitching(format!("omega1 has no flat edge on x1 = -1 covering |x'| < {reach} (and >= 4 eps)"))
        })?;
        let j = find_seam(o2, 1.0, false, reach, eps).ok_or_else(|| {
            Error::Stitching(format!("omega2 has no flat edge on x1 = 1 covering |x'| < {reach} (and >= 4 eps)"))
        })?;

        let (lower, upper) = connector_boundaries(eps, &self.rho, self.connector_samples);
        let mut ring: Vec<Point> = Vec::new();
        let mut marks: Vec<EdgeMarker> = Vec::new();

        // Ω₁ from the top of its seam edge around to the bottom.
        let n1 = o1.len();
        for s in 0..n1 {
            let idx = (i + 1 + s) % n1;
            let mut p = o1[idx];
            if s == 0 || s == n1 - 1 {
                p.x = -1.0;
            }
            ring.push(p);
            marks.push(if s == n1 - 1 { m1[i] } else { m1[idx] });
        }
        // lower connector wall, left to right
        for (k, &p) in lower.iter().enumerate() {
            ring.push(p);
            marks.push(if k == lower.len() - 1 { m2[j] } else { EdgeMarker::Outer });
        }
        // Ω₂ from the bottom of its seam edge around to the top.
        let n2 = o2.len();
        for s in 0..n2 {
            let idx = (j + 1 + s) % n2;
            let mut p = o2[idx];
            if s == 0 || s == n2 - 1 {
                p.x = 1.0;
            }
            ring.push(p);
            marks.push(if s == n2 - 1 { m2[j] } else { m2[idx] });
        }
        // upper connector wall, right to left
        for (k, &p) in upper.iter().enumerate() {
            ring.push(p);
            marks.push(if k == upper.len() - 1 { m1[i] } else { EdgeMarker::Outer });
        }

        let mut rings = alloc::vec![ring];
        let mut markers = alloc::vec![marks];
        for dom in [&self.omega1, &self.omega2] {
            rings.extend(dom.rings[1..].iter().cloned());
            markers.extend(dom.markers[1..].iter().cloned());
        }
        PolygonDomain::new(rings, markers).map_err(|e| Error::Stitching(format!("{e}")))
    }

    pub fn area_omega1(&self) -> f64 {
        self.omega1.area()
    }

    pub fn area_omega2(&self) -> f64 {
        self.omega2.area()
    }
}

fn find_seam(ring: &[Point], x: f64, upward: bool, reach: f64, eps: f64) -> Option<usize> {
    let n = ring.len();
    (0..n).find(|&i| {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        let on_line = (a.x - x).abs() <= SEAM_TOL && (b.x - x).abs() <= SEAM_TOL;
        let (lo, hi) = if upward { (a.y, b.y) } else { (b.y, a.y) };
        on_line && lo <= -reach && hi >= reach && hi - lo >= 4.0 * eps && lo < -2.0 * eps && hi > 2.0 * eps
    })
}

/// Lower wall from `(-1, -2ε)` to `(1, -2ε)` and upper wall from `(1, 2ε)`
/// back to `(-1, 2ε)`.
fn connector_boundaries(eps: f64, rho: &BumpProfile, samples: usize) -> (Vec<Point>, Vec<Point>) {
    let n = samples - 1;
    let left: Vec<Point> = (0..samples)
        .map(|k| {
            let x = -1.0 + 2.0 * eps * k as f64 / n as f64;
            Point::new(x, eps * rho.value((-1.0 - x) / eps))
        })
        .collect();
    let mut upper_lr: Vec<Point> = left.clone();
    upper_lr.extend(left.iter().rev().map(|p| Point::new(-p.x, p.y)));
    let lower: Vec<Point> = upper_lr.iter().map(|p| p.mirror_y()).collect();
    let upper: Vec<Point> = upper_lr.into_iter().rev().collect();
    (lower, upper)
}

/// Closed polygon of the connector `Q₁(ε) ∪ L(ε) ∪ Q₂(ε)`.
pub fn build_connector(epsilon: f64, rho: &BumpProfile, samples: usize) -> Result<PolygonDomain> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid("epsilon", format!("must be positive, got {epsilon}")));
    }
    if epsilon >= 0.25 {
        return Err(invalid("epsilon", "flares overlap unless epsilon < 1/4"));
    }
    if samples < 8 {
        return Err(invalid("samples", "must be at least 8"));
    }
    let (lower, upper) = connector_boundaries(epsilon, rho, samples);
    let ring: Vec<Point> = lower.into_iter().chain(upper).collect();
    PolygonDomain::from_outer(ring, EdgeMarker::Outer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::signed_area;

    #[test]
    fn connector_corners_and_midline() {
        let rho = BumpProfile::default();
        let c = build_connector(0.05, &rho, 8).unwrap();
        let ring = c.outer();
        assert_eq!(ring[0], Point::new(-1.0, -0.1));
        assert!(ring.contains(&Point::new(-1.0, 0.1)));
        assert!(ring.contains(&Point::new(1.0, 0.1)));
        assert_eq!(c.vertical_section(0.0), alloc::vec![(-0.05, 0.05)]);
        // sampled abscissae of Q1 carry eps * rho exactly
        for (k, p) in ring.iter().take(8).enumerate() {
            let x = -1.0 + 0.1 * k as f64 / 7.0;
            assert!((p.x - x).abs() < 1e-15);
            assert!((-p.y - 0.05 * rho.value((-1.0 - x) / 0.05)).abs() < 1e-12);
        }
    }

    #[test]
    fn connector_rejects_bad_input() {
        let rho = BumpProfile::default();
        assert!(build_connector(0.0, &rho, 8).is_err());
        assert!(build_connector(0.05, &rho, 4).is_err());
    }

    #[test]
    fn dumbbell_area_additive() {
        let spec = DumbbellSpec::default_rectangles(0.05).unwrap();
        let dom = spec.build().unwrap();
        let conn = spec.connector().unwrap().area();
        let expected = 4.0 + 1.0 + conn;
        assert!((dom.area() - expected).abs() <= 1e-12 * expected);
        // half-width lies in [eps, 2 eps] and exceeds eps only on the two flares
        let eps: f64 = 0.05;
        assert!(conn > 2.0 * eps * 2.0 && conn < 2.0 * eps * 2.0 * 2.0);
        assert!(conn < 2.0 * eps * 2.0 + 2.0 * eps * 4.0 * eps);
    }

    #[test]
    fn dumbbell_area_tends_to_base_areas() {
        let spec = DumbbellSpec::default_rectangles(1e-6).unwrap();
        assert!((spec.build().unwrap().area() - 5.0).abs() < 1e-5);
    }

    #[test]
    fn wide_connector_rejected() {
        let mut spec = DumbbellSpec::default_rectangles(0.05).unwrap();
        spec.epsilon = 0.2;
        spec.xi = 0.1;
        assert!(matches!(spec.validate(), Err(Error::InvalidParameter { name: "epsilon", .. })));
    }

    #[test]
    fn seam_vertices_are_exact() {
        let spec = DumbbellSpec::default_rectangles(0.03).unwrap();
        let dom = spec.build().unwrap();
        let ring = dom.outer();
        for (k, p) in ring.iter().enumerate() {
            if p.x.abs() == 1.0 {
                let allowed = [2.0 * 0.03, 1.0, 0.5];
                assert!(allowed.iter().any(|a| (p.y.abs() - a).abs() < 1e-15), "seam vertex {p:?}");
            }
            assert_ne!(*p, ring[(k + 1) % ring.len()]);
        }
        assert!(signed_area(ring) > 0.0);
    }

    #[test]
    fn mirror_symmetric_construction() {
        let spec = DumbbellSpec::default_rectangles(0.08).unwrap();
        let ring = spec.build().unwrap().outer().to_vec();
        for p in &ring {
            let m = p.mirror_y();
            assert!(ring.iter().any(|q| q.x == m.x && q.y == m.y), "{p:?} has no mirror image");
        }
    }

    #[test]
    fn classification_examples() {
        let spec = DumbbellSpec::default_rectangles(0.05).unwrap();
        assert_eq!(spec.classify_point(Point::new(-2.0, 0.0)), Region::Omega1);
        assert_eq!(spec.classify_point(Point::new(0.0, 0.0)), Region::Connector);
        assert_eq!(spec.classify_point(Point::new(0.0, 3.0)), Region::Outside);
        assert_eq!(spec.classify_point(Point::new(1.5, 0.2)), Region::Omega2);
        // seam tie-break
        assert_eq!(spec.classify_point(Point::new(-1.0, 0.05)), Region::Connector);
        assert_eq!(spec.classify_point(Point::new(-1.0, 0.5)), Region::Omega1);
        assert_eq!(spec.classify_point(Point::new(0.0, 0.06)), Region::Outside);
        assert!((spec.half_width(-1.0) - 0.1).abs() < 1e-15);
        assert_eq!(spec.half_width(0.0), 0.05);
    }

    #[test]
    fn monte_carlo_classification_matches_areas() {
        use rand::{Rng, SeedableRng};
        let spec = DumbbellSpec::default_rectangles(0.1).unwrap();
        let conn = spec.connector().unwrap().area();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let p = Point::new(rng.random_range(-3.0..2.0), rng.random_range(-1.0..1.0));
            counts[spec.classify_point(p) as usize] += 1;
        }
        let box_area = 10.0;
        let est = |c: usize| c as f64 / n as f64 * box_area;
        assert!((est(counts[0]) - 4.0).abs() < 0.05);
        assert!((est(counts[1]) - 1.0).abs() < 0.03);
        assert!((est(counts[2]) - conn).abs() < 0.02);
    }
}
