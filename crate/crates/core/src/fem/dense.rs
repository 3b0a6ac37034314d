use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use super::SparseSymmetricMatrix;
use crate::error::{Error, Result};

/// Largest dimension accepted by the dense solver.
pub const DENSE_CAP: usize = 2000;

/// All eigenpairs of `K x = λ M x` by Cholesky reduction of `M` and a dense
/// symmetric eigensolver, sorted ascending. Vectors are M-normalized.
pub fn dense_generalized_eigs(k: &SparseSymmetricMatrix, m: &SparseSymmetricMatrix) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = k.dim();
    if n > DENSE_CAP {
        return Err(Error::DimensionCap { dim: n, cap: DENSE_CAP });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let kd = DMatrix::from_row_slice(n, n, &k.to_dense());
    let md = DMatrix::from_row_slice(n, n, &m.to_dense());
    let chol = md.cholesky().ok_or_else(|| Error::Factorization("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let x = l.solve_lower_triangular(&kd).ok_or_else(|| Error::Factorization("singular Cholesky factor".into()))?;
    let mut c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Factorization("singular Cholesky factor".into()))?;
    // remove rounding asymmetry before the symmetric solve
    let ct = c.transpose();
    c = (c + ct) * 0.5;
    let eig = SymmetricEigen::new(c);
    let vecs = l
        .transpose()
        .solve_upper_triangular(&eig.eigenvectors)
        .ok_or_else(|| Error::Factorization("singular Cholesky factor".into()))?;
    let mut pairs: Vec<(f64, Vec<f64>)> =
        (0..n).map(|j| (eig.eigenvalues[j], vecs.column(j).iter().copied().collect())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}
