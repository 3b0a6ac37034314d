use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dense::{dense_generalized_eigs, DENSE_CAP};
use super::{assemble, reverse_cuthill_mckee, LdlFactor, SparseSymmetricMatrix};
use crate::error::{invalid, Error, Result};
use crate::geometry::{EdgeMarker, Region};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
        }
    }

    /// Default spectral shift: `K` is definite after Dirichlet elimination,
    /// while the Neumann zero mode needs a shift below zero.
    pub fn default_shift(self) -> f64 {
        match self {
            BoundaryCondition::Dirichlet => 0.0,
            BoundaryCondition::Neumann => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub k: usize,
    /// Relative residual target.
    pub tol: f64,
    pub seed: u64,
    pub max_matvecs: usize,
    pub restarts: usize,
    /// Overrides the default shift of the boundary condition.
    pub shift: Option<f64>,
    /// Inverse-iteration polish of simple eigenpairs, which also gives
    /// componentwise-accurate values where an eigenvector is exponentially
    /// small.
    pub polish: bool,
    /// Sylvester-inertia audit that no eigenvalue was skipped.
    pub check_inertia: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            k: 1,
            tol: 1e-9,
            seed: 0,
            max_matvecs: 50_000,
            restarts: 3,
            shift: None,
            polish: true,
            check_inertia: true,
        }
    }
}

impl SolverParams {
    pub fn with_k(k: usize) -> Self {
        Self { k, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    KrylovSchur,
    Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda: f64,
    /// Nodal values on all mesh vertices (zero on eliminated vertices).
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub bc: BoundaryCondition,
    pub pairs: Vec<EigenPair>,
    /// `‖Ku − λMu‖` in the lumped `M⁻¹` norm, divided by `max(|λ|, 1)`.
    pub residuals: Vec<f64>,
    /// Index groups of eigenvalues equal to 1e-8 relative.
    pub clusters: Vec<Vec<usize>>,
    pub matvecs: usize,
    pub method: SolveMethod,
    pub n_vertices: usize,
    pub n_dofs: usize,
}

impl EigenResult {
    pub fn lambdas(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }
}

/// Assembles on `mesh` and solves, eliminating `outer` and `obstacle`
/// boundary vertices for Dirichlet conditions.
pub fn solve_mesh(mesh: &Mesh, bc: BoundaryCondition, params: &SolverParams) -> Result<EigenResult> {
    let (k, m) = assemble(mesh)?;
    solve_eigs(&k, &m, bc, &constrained_vertices(mesh, bc), params)
}

/// Vertices eliminated under `bc`.
pub fn constrained_vertices(mesh: &Mesh, bc: BoundaryCondition) -> Vec<bool> {
    match bc {
        BoundaryCondition::Dirichlet => mesh.boundary_mask(&[EdgeMarker::Outer, EdgeMarker::Obstacle]),
        BoundaryCondition::Neumann => alloc::vec![false; mesh.n_vertices()],
    }
}

/// The `params.k` smallest eigenpairs of `K u = λ M u` with `constrained`
/// vertices eliminated.
pub fn solve_eigs(
    k: &SparseSymmetricMatrix,
    m: &SparseSymmetricMatrix,
    bc: BoundaryCondition,
    constrained: &[bool],
    params: &SolverParams,
) -> Result<EigenResult> {
    if params.k == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    if !(params.tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let n_all = k.dim();
    if m.dim() != n_all || constrained.len() != n_all {
        return Err(invalid("constrained", "dimension mismatch"));
    }
    let free: Vec<bool> = constrained.iter().map(|c| !c).collect();
    let kr = k.restrict(&free);
    let mr = m.restrict(&free);
    let n = kr.dim();
    if params.k > n {
        return Err(invalid("k", format!("{} exceeds the {n} free degrees of freedom", params.k)));
    }
    let lumped: Vec<f64> = mr.row_sums();
    let perm = reverse_cuthill_mckee(&kr);

    let (pairs, matvecs, method) = match krylov_schur_solve(&kr, &mr, &perm, bc, params) {
        Ok((p, mv)) => (p, mv, SolveMethod::KrylovSchur),
        Err(_) if n <= DENSE_CAP => {
            let all = dense_generalized_eigs(&kr, &mr)?;
            (all.into_iter().take(params.k).collect(), 0, SolveMethod::Dense)
        }
        Err(e) => return Err(e),
    };

    let mut pairs = pairs;
    let clusters = clusters_of(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    if params.polish || params.check_inertia {
        polish(&kr, &mr, &perm, &mut pairs, &clusters, params)?;
    }

    let residuals: Vec<f64> = pairs.iter().map(|(l, x)| residual(&kr, &mr, &lumped, *l, x)).collect();
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if !(worst <= params.tol) {
        return Err(Error::NotConverged { matvecs, achieved: residuals });
    }
    let clusters = clusters_of(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let pairs = pairs.into_iter().map(|(lambda, x)| EigenPair { lambda, u: scatter_free(&x, &free) }).collect();
    Ok(EigenResult { bc, pairs, residuals, clusters, matvecs, method, n_vertices: n_all, n_dofs: n })
}

/// Expands a vector over free vertices to all vertices, zero elsewhere.
pub(crate) fn scatter_free(x: &[f64], free: &[bool]) -> Vec<f64> {
    let mut u = alloc::vec![0.0; free.len()];
    let mut it = x.iter();
    for (slot, &f) in u.iter_mut().zip(free) {
        if f {
            *slot = *it.next().expect("one value per free vertex");
        }
    }
    u
}

pub(crate) fn clusters_of(lambdas: &[f64]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &l) in lambdas.iter().enumerate() {
        match out.last_mut() {
            Some(c) if (l - lambdas[*c.last().expect("non-empty")]).abs() <= 1e-8 * l.abs().max(1.0) => c.push(i),
            _ => out.push(alloc::vec![i]),
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn residual(
    k: &SparseSymmetricMatrix,
    m: &SparseSymmetricMatrix,
    lumped: &[f64],
    lambda: f64,
    x: &[f64],
) -> f64 {
    let kx = k.mul_vec(x);
    let mx = m.mul_vec(x);
    let s: f64 = kx.iter().zip(&mx).zip(lumped).map(|((a, b), w)| (a - lambda * b).powi(2) / w).sum();
    libm::sqrt(s) / lambda.abs().max(1.0)
}

/// Factors `K − σM`, nudging σ downwards when a pivot vanishes.
fn factor_shift(
    k: &SparseSymmetricMatrix,
    m: &SparseSymmetricMatrix,
    perm: &[usize],
    sigma: f64,
) -> Result<(LdlFactor, f64)> {
    let mut s = sigma;
    let mut last = None;
    for attempt in 0..6 {
        let a = SparseSymmetricMatrix::combine(1.0, k, -s, m);
        match LdlFactor::factor(&a, perm) {
            Ok(f) => return Ok((f, s)),
            Err(e) => last = Some(e),
        }
        s -= 1e-6 * (1.0 + s.abs()) * (1 << attempt) as f64;
    }
    Err(Error::Factorization(format!("shift adjustment exhausted near {sigma}: {:?}", last)))
}

struct ShiftInvert<'a> {
    factor: LdlFactor,
    m: &'a SparseSymmetricMatrix,
    matvecs: usize,
}

impl ShiftInvert<'_> {
    fn apply(&mut self, x: &[f64]) -> Vec<f64> {
        self.matvecs += 1;
        self.factor.solve(&self.m.mul_vec(x))
    }
}

/// M-orthogonalizes `w` (with cached `M·basis`) against `basis`, twice.
/// Returns the accumulated coefficients.
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>], mbasis: &[Vec<f64>]) -> Vec<f64> {
    let mut coeff = alloc::vec![0.0; basis.len()];
    for _ in 0..2 {
        for (c, (v, mv)) in coeff.iter_mut().zip(basis.iter().zip(mbasis)) {
            let h = dot(w, mv);
            axpy(-h, v, w);
            *c += h;
        }
    }
    coeff
}

fn random_unit(
    n: usize,
    rng: &mut ChaCha8Rng,
    m: &SparseSymmetricMatrix,
    locked: &[Vec<f64>],
    mlocked: &[Vec<f64>],
    basis: &[Vec<f64>],
    mbasis: &[Vec<f64>],
) -> Option<(Vec<f64>, Vec<f64>)> {
    for _ in 0..4 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        orthogonalize(&mut v, locked, mlocked);
        orthogonalize(&mut v, basis, mbasis);
        let mv = m.mul_vec(&v);
        let nrm = libm::sqrt(dot(&v, &mv));
        if nrm > 1e-8 {
            let inv = 1.0 / nrm;
            return Some((v.iter().map(|x| x * inv).collect(), mv.iter().map(|x| x * inv).collect()));
        }
    }
    None
}

/// Thick-restart (Krylov–Schur) Lanczos on `(K − σM)⁻¹ M` in the M-inner
/// product, restricted to the M-orthogonal complement of `locked`.
/// Returns `nev` Ritz pairs `(θ, x)` with the largest θ.
fn krylov_schur(
    op: &mut ShiftInvert<'_>,
    nev: usize,
    locked: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
    ritz_tol: f64,
    budget: usize,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let m = op.m;
    let n = m.dim();
    let avail = n - locked.len();
    let ncv = avail.min((2 * nev + 10).max(24));
    let mlocked: Vec<Vec<f64>> = locked.iter().map(|v| m.mul_vec(v)).collect();

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(ncv + 1);
    let mut mbasis: Vec<Vec<f64>> = Vec::with_capacity(ncv + 1);
    let mut t = DMatrix::<f64>::zeros(ncv, ncv);
    let (v0, mv0) = random_unit(n, rng, m, locked, &mlocked, &[], &[])
        .ok_or_else(|| Error::SolverQuality("could not draw a start vector".into()))?;
    basis.push(v0);
    mbasis.push(mv0);
    let mut kept = 0;
    let mut last_res: Vec<f64> = Vec::new();

    loop {
        let mut beta = 0.0;
        let mut next: Option<(Vec<f64>, Vec<f64>)> = None;
        for j in kept..ncv {
            if op.matvecs >= budget {
                return Err(Error::NotConverged { matvecs: op.matvecs, achieved: last_res });
            }
            let mut w = op.apply(&basis[j]);
            orthogonalize(&mut w, locked, &mlocked);
            let h = orthogonalize(&mut w, &basis, &mbasis);
            for (i, &hi) in h.iter().enumerate() {
                t[(i, j)] = hi;
                t[(j, i)] = hi;
            }
            let mw = m.mul_vec(&w);
            beta = libm::sqrt(dot(&w, &mw).max(0.0));
            let scale = h.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let (v, mv) = if beta > 1e-10 * scale.max(f64::MIN_POSITIVE) {
                let inv = 1.0 / beta;
                (w.iter().map(|x| x * inv).collect(), mw.iter().map(|x| x * inv).collect())
            } else {
                // invariant subspace: continue with a fresh direction
                beta = 0.0;
                match random_unit(n, rng, m, locked, &mlocked, &basis, &mbasis) {
                    Some(pair) => pair,
                    None => (alloc::vec![0.0; n], alloc::vec![0.0; n]),
                }
            };
            if j + 1 < ncv {
                t[(j + 1, j)] = beta;
                t[(j, j + 1)] = beta;
                basis.push(v);
                mbasis.push(mv);
            } else {
                next = Some((v, mv));
            }
        }

        let eig = SymmetricEigen::new(t.clone());
        let mut order: Vec<usize> = (0..ncv).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let res: Vec<f64> = order.iter().map(|&i| (beta * eig.eigenvectors[(ncv - 1, i)]).abs()).collect();
        last_res = res.iter().take(nev).copied().collect();
        let converged = ncv == avail || (0..nev).all(|r| res[r] <= ritz_tol * eig.eigenvalues[order[r]].abs());

        let ritz = |cols: &[usize], basis: &[Vec<f64>]| -> Vec<Vec<f64>> {
            cols.iter()
                .map(|&c| {
                    let mut x = alloc::vec![0.0; n];
                    for (j, v) in basis.iter().enumerate() {
                        axpy(eig.eigenvectors[(j, c)], v, &mut x);
                    }
                    x
                })
                .collect()
        };

        if converged {
            let cols: Vec<usize> = order[..nev].to_vec();
            let xs = ritz(&cols, &basis);
            return Ok(cols.iter().zip(xs).map(|(&c, x)| (eig.eigenvalues[c], x)).collect());
        }

        // thick restart with the leading Ritz vectors
        let p = (nev + (ncv - nev) / 2).min(ncv - 1).max(nev);
        let cols: Vec<usize> = order[..p].to_vec();
        let new_basis = ritz(&cols, &basis);
        let (f, mf) = next.expect("basis was filled");
        t.fill(0.0);
        for (r, &c) in cols.iter().enumerate() {
            t[(r, r)] = eig.eigenvalues[c];
            let b = beta * eig.eigenvectors[(ncv - 1, c)];
            t[(r, p)] = b;
            t[(p, r)] = b;
        }
        mbasis = new_basis.iter().map(|v| m.mul_vec(v)).collect();
        basis = new_basis;
        basis.push(f);
        mbasis.push(mf);
        kept = p;
    }
}

/// Shift-invert Krylov–Schur with deflated restarts until the inertia of
/// `K − σM` confirms that the lowest `k` eigenvalues are all present.
type Pairs = Vec<(f64, Vec<f64>)>;

fn krylov_schur_solve(
    k: &SparseSymmetricMatrix,
    m: &SparseSymmetricMatrix,
    perm: &[usize],
    bc: BoundaryCondition,
    params: &SolverParams,
) -> Result<(Pairs, usize)> {
    let n = k.dim();
    let sigma0 = params.shift.unwrap_or_else(|| bc.default_shift());
    let (factor, _) = factor_shift(k, m, perm, sigma0)?;
    let below_shift = factor.negative_pivots();
    let mut op = ShiftInvert { factor, m, matvecs: 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let lumped = m.row_sums();

    let mut found: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut ritz_tol = 1e-3 * params.tol;
    let want = params.k + below_shift;
    for attempt in 0..=params.restarts {
        let locked: Vec<Vec<f64>> = found.iter().map(|p| p.1.clone()).collect();
        let nev = (want - found.len().min(want)).max(1).min(n - locked.len());
        let got = krylov_schur(&mut op, nev, &locked, &mut rng, ritz_tol, params.max_matvecs);
        let got = match got {
            Ok(g) => g,
            Err(_) if attempt < params.restarts => {
                rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(attempt as u64 + 1));
                continue;
            }
            Err(e) => return Err(e),
        };
        for (_, mut x) in got {
            let mx = m.mul_vec(&x);
            let nrm = libm::sqrt(dot(&x, &mx));
            x.iter_mut().for_each(|v| *v /= nrm);
            // Rayleigh quotient, more accurate than σ + 1/θ
            let lambda = k.bilinear(&x, &x);
            found.push((lambda, x));
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0));

        let residual_ok = found.iter().take(want).all(|(l, x)| residual(k, m, &lumped, *l, x) <= params.tol);
        if !residual_ok {
            ritz_tol *= 1e-2;
            found.clear();
            continue;
        }
        if found.len() < want {
            continue;
        }
        if !params.check_inertia {
            break;
        }
        // no eigenvalue may hide below the largest wanted one
        let top = found[want - 1].0;
        let probe = top + 1e-7 * top.abs().max(1.0);
        let (f, _) = factor_shift(k, m, perm, probe)?;
        let count = f.negative_pivots();
        let listed = found.iter().filter(|p| p.0 < probe).count();
        if count <= listed {
            break;
        }
        if attempt == params.restarts {
            return Err(Error::SolverQuality(format!("{} eigenvalues below {probe} but only {listed} found", count)));
        }
    }
    if found.len() < want {
        return Err(Error::NotConverged { matvecs: op.matvecs, achieved: Vec::new() });
    }
    // drop any modes below a user-supplied shift
    let skip = below_shift;
    let pairs = found.into_iter().skip(skip).take(params.k).collect();
    Ok((pairs, op.matvecs))
}

/// Inverse iteration at a shift just below each simple eigenvalue, with an
/// inertia audit of the eigenvalue count below the shift.
fn polish(
    k: &SparseSymmetricMatrix,
    m: &SparseSymmetricMatrix,
    perm: &[usize],
    pairs: &mut [(f64, Vec<f64>)],
    clusters: &[Vec<usize>],
    params: &SolverParams,
) -> Result<()> {
    let lumped = m.row_sums();
    for cluster in clusters {
        let first = cluster[0];
        let lambda = pairs[first].0;
        let sigma = lambda - 1e-8 * lambda.abs().max(1.0);
        let (f, _) = factor_shift(k, m, perm, sigma)?;
        if params.check_inertia && params.shift.is_none() && f.negative_pivots() != first {
            return Err(Error::SolverQuality(format!(
                "inertia below {sigma} is {}, expected {first}",
                f.negative_pivots()
            )));
        }
        if !params.polish || cluster.len() > 1 {
            continue;
        }
        let mut x = pairs[first].1.clone();
        for _ in 0..4 {
            x = f.solve(&m.mul_vec(&x));
            let nrm = libm::sqrt(m.bilinear(&x, &x));
            x.iter_mut().for_each(|v| *v /= nrm);
        }
        let old = &pairs[first].1;
        if dot(&x, &m.mul_vec(old)) < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        let l = k.bilinear(&x, &x);
        let orthogonal =
            pairs.iter().enumerate().filter(|&(j, _)| j != first).all(|(_, (_, y))| m.bilinear(&x, y).abs() <= 1e-10);
        let before = residual(k, m, &lumped, pairs[first].0, &pairs[first].1);
        if orthogonal && residual(k, m, &lumped, l, &x) <= before.max(params.tol) {
            pairs[first] = (l, x);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignConvention<'a> {
    /// Ground state made non-negative.
    GroundStatePositive,
    /// Ground state positive and the second eigenfunction negative on
    /// average over the given `Omega1` vertices.
    Neumann2NegativeOnOmega1 { regions: &'a [Region] },
}

/// Applies a sign gauge. A ground state with values of both signs above the
/// noise floor `1e-8 · max|u|` is a solver-quality error.
pub fn fix_sign(mut result: EigenResult, convention: SignConvention<'_>) -> Result<EigenResult> {
    if let Some(first) = result.pairs.first_mut() {
        let u = &mut first.u;
        let (imax, _) =
            u.iter().enumerate().fold((0, 0.0f64), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
        let peak = u[imax].abs();
        if u[imax] < 0.0 {
            u.iter_mut().for_each(|v| *v = -*v);
        }
        if u.iter().any(|&v| v < -1e-8 * peak) {
            return Err(Error::SolverQuality("ground state changes sign".into()));
        }
    }
    if let SignConvention::Neumann2NegativeOnOmega1 { regions } = convention {
        if let Some(second) = result.pairs.get_mut(1) {
            let (sum, count) = second
                .u
                .iter()
                .zip(regions)
                .filter(|(_, &r)| r == Region::Omega1)
                .fold((0.0, 0usize), |(s, c), (v, _)| (s + v, c + 1));
            if count == 0 {
                return Err(Error::EmptyRegion(Region::Omega1));
            }
            if sum > 0.0 {
                second.u.iter_mut().for_each(|v| *v = -*v);
            }
        }
    }
    Ok(result)
}
