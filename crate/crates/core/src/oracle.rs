//! Closed-form spectra of rectangles and intervals, and a brute-force dense
//! reference for the sparse eigensolver.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fem::{
    assemble, clusters_of, constrained_vertices, dense_generalized_eigs, residual, scatter_free, BoundaryCondition,
    EigenPair, EigenResult, SolveMethod, SparseSymmetricMatrix,
};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumDomain {
    /// `[0, a] × [0, b]`.
    Rectangle { a: f64, b: f64 },
    /// `[0, length]`.
    Interval { length: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticMode {
    pub value: f64,
    pub m: u32,
    /// Zero for intervals.
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSpectrum {
    pub domain: SpectrumDomain,
    pub bc: BoundaryCondition,
    pub modes: Vec<AnalyticMode>,
}

impl AnalyticSpectrum {
    pub fn values(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.value).collect()
    }

    /// L²-normalized eigenfunction of mode `index` at `(x, y)`; `y` is
    /// ignored on intervals.
    pub fn eigenfunction(&self, index: usize, x: f64, y: f64) -> f64 {
        let mode = self.modes[index];
        match self.domain {
            SpectrumDomain::Rectangle { a, b } => factor(self.bc, mode.m, a, x) * factor(self.bc, mode.n, b, y),
            SpectrumDomain::Interval { length } => factor(self.bc, mode.m, length, x),
        }
    }

    /// Analytic Laplacian of [`eigenfunction`](Self::eigenfunction),
    /// differentiating each one-dimensional factor separately.
    pub fn laplacian(&self, index: usize, x: f64, y: f64) -> f64 {
        let mode = self.modes[index];
        let d2 = |k: u32, len: f64, t: f64| -(k as f64 * PI / len).powi(2) * factor(self.bc, k, len, t);
        match self.domain {
            SpectrumDomain::Rectangle { a, b } => {
                d2(mode.m, a, x) * factor(self.bc, mode.n, b, y) + factor(self.bc, mode.m, a, x) * d2(mode.n, b, y)
            }
            SpectrumDomain::Interval { length } => d2(mode.m, length, x),
        }
    }

    /// Number of listed values `≤ lambda`.
    pub fn counting(&self, lambda: f64) -> usize {
        self.modes.iter().take_while(|m| m.value <= lambda).count()
    }
}

fn factor(bc: BoundaryCondition, k: u32, len: f64, t: f64) -> f64 {
    let arg = k as f64 * PI * t / len;
    match bc {
        BoundaryCondition::Dirichlet => libm::sqrt(2.0 / len) * libm::sin(arg),
        BoundaryCondition::Neumann if k == 0 => libm::sqrt(1.0 / len),
        BoundaryCondition::Neumann => libm::sqrt(2.0 / len) * libm::cos(arg),
    }
}

/// The `k` smallest eigenvalues of `[0, a] × [0, b]`, sorted by value and
/// then by `(m, n)`.
pub fn rectangle_spectrum(a: f64, b: f64, bc: BoundaryCondition, k: usize) -> Result<AnalyticSpectrum> {
    if !(a > 0.0 && b > 0.0) {
        return Err(invalid("rectangle", "side lengths must be positive"));
    }
    if k == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    let lo = match bc {
        BoundaryCondition::Dirichlet => 1,
        BoundaryCondition::Neumann => 0,
    };
    // the k smallest values use indices below lo + k in each direction
    let top = lo + k as u32;
    let mut modes: Vec<AnalyticMode> = Vec::with_capacity(k * k);
    for m in lo..top {
        for n in lo..top {
            let value = PI * PI * ((m as f64 / a).powi(2) + (n as f64 / b).powi(2));
            modes.push(AnalyticMode { value, m, n });
        }
    }
    modes.sort_by(|p, q| p.value.total_cmp(&q.value).then(p.m.cmp(&q.m)).then(p.n.cmp(&q.n)));
    modes.truncate(k);
    Ok(AnalyticSpectrum { domain: SpectrumDomain::Rectangle { a, b }, bc, modes })
}

/// `η_j = (jπ/L)²` for `j = 1..=k`.
pub fn interval_dirichlet(length: f64, k: usize) -> Result<AnalyticSpectrum> {
    if !(length > 0.0) {
        return Err(invalid("length", "must be positive"));
    }
    let modes = (1..=k as u32).map(|m| AnalyticMode { value: (m as f64 * PI / length).powi(2), m, n: 0 }).collect();
    Ok(AnalyticSpectrum { domain: SpectrumDomain::Interval { length }, bc: BoundaryCondition::Dirichlet, modes })
}

/// The `nev` smallest eigenpairs of `K x = λ M x` by a dense solve.
pub fn dense_reference_eigs(
    k: &SparseSymmetricMatrix,
    m: &SparseSymmetricMatrix,
    nev: usize,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let mut all = dense_generalized_eigs(k, m)?;
    all.truncate(nev);
    Ok(all)
}

/// Dense counterpart of [`crate::fem::solve_mesh`], with the same boundary
/// elimination and result layout.
pub fn dense_reference_mesh(mesh: &Mesh, bc: BoundaryCondition, nev: usize) -> Result<EigenResult> {
    if nev == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    let (k, m) = assemble(mesh)?;
    let free: Vec<bool> = constrained_vertices(mesh, bc).iter().map(|c| !c).collect();
    let (kr, mr) = (k.restrict(&free), m.restrict(&free));
    let pairs = dense_reference_eigs(&kr, &mr, nev)?;
    let lumped = mr.row_sums();
    let residuals = pairs.iter().map(|(l, x)| residual(&kr, &mr, &lumped, *l, x)).collect();
    let clusters = clusters_of(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    Ok(EigenResult {
        bc,
        pairs: pairs.into_iter().map(|(lambda, x)| EigenPair { lambda, u: scatter_free(&x, &free) }).collect(),
        residuals,
        clusters,
        matvecs: 0,
        method: SolveMethod::Dense,
        n_vertices: mesh.n_vertices(),
        n_dofs: kr.dim(),
    })
}

/// `|⟨u, v⟩_M| / (‖u‖_M ‖v‖_M)`.
pub fn m_alignment(m: &SparseSymmetricMatrix, u: &[f64], v: &[f64]) -> f64 {
    let uv = m.bilinear(u, v);
    (uv / libm::sqrt(m.bilinear(u, u) * m.bilinear(v, v))).abs()
}

/// Sine of the largest principal angle between the spans of two
/// M-orthonormal families of equal size.
pub fn subspace_sine(m: &SparseSymmetricMatrix, us: &[&[f64]], vs: &[&[f64]]) -> f64 {
    let p = us.len();
    assert_eq!(p, vs.len(), "subspaces of different dimension");
    let c = DMatrix::from_fn(p, p, |i, j| m.bilinear(us[i], vs[j]));
    let smallest = c.singular_values().iter().copied().fold(f64::INFINITY, f64::min).min(1.0);
    libm::sqrt((1.0 - smallest * smallest).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{solve_mesh, SolverParams};
    use crate::geometry::{Point, PolygonDomain};
    use crate::mesh::{triangulate, MeshParams};

    #[test]
    fn rectangle_examples() {
        let d = rectangle_spectrum(1.0, 1.0, BoundaryCondition::Dirichlet, 3).unwrap();
        let close = |got: &[f64], want: &[f64]| got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 1e-13 * w.max(1.0));
        assert!(close(&d.values(), &[2.0 * PI * PI, 5.0 * PI * PI, 5.0 * PI * PI]));
        assert_eq!((d.modes[1].m, d.modes[1].n), (1, 2));
        let big = rectangle_spectrum(2.0, 2.0, BoundaryCondition::Dirichlet, 1).unwrap();
        assert!((big.modes[0].value - PI * PI / 2.0).abs() < 1e-14);
        let n = rectangle_spectrum(1.0, 1.0, BoundaryCondition::Neumann, 3).unwrap();
        assert!(close(&n.values(), &[0.0, PI * PI, PI * PI]));
    }

    #[test]
    fn interval_examples() {
        let q = interval_dirichlet(2.0, 5).unwrap();
        assert!((q.modes[0].value - PI * PI / 4.0).abs() < 1e-15);
        for (k, m) in q.modes.iter().enumerate() {
            assert!((m.value / q.modes[0].value - ((k + 1) * (k + 1)) as f64).abs() < 1e-12);
        }
        assert!((interval_dirichlet(1.0, 1).unwrap().modes[0].value - PI * PI).abs() < 1e-15);
        assert!(interval_dirichlet(0.0, 1).is_err());
    }

    #[test]
    fn helmholtz_residual_vanishes() {
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let s = rectangle_spectrum(1.5, 0.7, bc, 12).unwrap();
            for i in 0..12 {
                for &(x, y) in &[(0.1, 0.2), (0.77, 0.31), (1.4, 0.65)] {
                    let r = s.laplacian(i, x, y) + s.modes[i].value * s.eigenfunction(i, x, y);
                    assert!(r.abs() <= 1e-12 * s.modes[i].value.max(1.0), "{r}");
                }
            }
        }
    }

    #[test]
    fn eigenfunctions_are_normalized() {
        let s = rectangle_spectrum(2.0, 1.0, BoundaryCondition::Neumann, 4).unwrap();
        let nq = 200;
        for i in 0..4 {
            let mut sum = 0.0;
            for p in 0..nq {
                for q in 0..nq {
                    let (x, y) = ((p as f64 + 0.5) * 2.0 / nq as f64, (q as f64 + 0.5) / nq as f64);
                    sum += s.eigenfunction(i, x, y).powi(2);
                }
            }
            sum *= 2.0 / (nq * nq) as f64;
            assert!((sum - 1.0).abs() < 1e-9, "{sum}");
        }
    }

    #[test]
    fn weyl_counting_smoke() {
        let (a, b) = (1.0, 1.0);
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let s = rectangle_spectrum(a, b, bc, 100).unwrap();
            let lambda = s.modes[99].value;
            let sign = if bc == BoundaryCondition::Dirichlet { -1.0 } else { 1.0 };
            let weyl = a * b * lambda / (4.0 * PI) + sign * 2.0 * (a + b) * libm::sqrt(lambda) / (4.0 * PI);
            let count = s.counting(lambda) as f64;
            assert!((count / weyl - 1.0).abs() < 0.2, "{bc:?}: {count} vs {weyl}");
        }
    }

    #[test]
    fn sparse_matches_dense_on_coarse_square() {
        let dom = PolygonDomain::rectangle(Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap();
        let mesh = triangulate(&dom, &MeshParams::uniform(0.1)).unwrap();
        let (_, m) = assemble(&mesh).unwrap();
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let sparse = solve_mesh(&mesh, bc, &SolverParams::with_k(3)).unwrap();
            let dense = dense_reference_mesh(&mesh, bc, 3).unwrap();
            assert!(
                (sparse.pairs[0].lambda - dense.pairs[0].lambda).abs() <= 1e-7 * dense.pairs[0].lambda.abs().max(1.0)
            );
            assert!(m_alignment(&m, &sparse.pairs[0].u, &dense.pairs[0].u) >= 1.0 - 1e-6);
            let us: Vec<&[f64]> = sparse.pairs[1..3].iter().map(|p| p.u.as_slice()).collect();
            let vs: Vec<&[f64]> = dense.pairs[1..3].iter().map(|p| p.u.as_slice()).collect();
            assert!(subspace_sine(&m, &us, &vs) <= 1e-5);
        }
    }
}
