use alloc::format;
use alloc::vec::Vec;

use super::SparseSymmetricMatrix;
use crate::error::{Error, Result};

/// Envelope (skyline) `L D Lᵀ` factorization of a symmetric matrix under a
/// fill-reducing permutation. No pivoting is performed, so the matrix must
/// have non-vanishing leading minors; any shift `K − σM` with σ away from
/// the spectrum qualifies. The number of negative pivots equals the number
/// of negative eigenvalues (Sylvester's law of inertia).
#[derive(Debug, Clone)]
pub struct LdlFactor {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    /// First stored column of each permuted row.
    first: Vec<usize>,
    /// Offset of each row's envelope in `l`.
    start: Vec<usize>,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl LdlFactor {
    pub fn factor(a: &SparseSymmetricMatrix, perm: &[usize]) -> Result<Self> {
        let n = a.dim();
        if perm.len() != n {
            return Err(Error::Factorization(format!("permutation length {} for dimension {n}", perm.len())));
        }
        let mut inv = alloc::vec![usize::MAX; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        // envelope per permuted row
        let mut first: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for &j in a.row(i).0 {
                let (r, c) = if inv[i] >= inv[j] { (inv[i], inv[j]) } else { (inv[j], inv[i]) };
                first[r] = first[r].min(c);
            }
        }
        let mut start = alloc::vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i]);
        }
        let mut l = alloc::vec![0.0; start[n]];
        let mut d = alloc::vec![0.0; n];
        // scatter A into the envelope
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (r, c) = if inv[i] >= inv[j] { (inv[i], inv[j]) } else { (inv[j], inv[i]) };
                if r == c {
                    d[r] += v;
                } else {
                    l[start[r] + c - first[r]] += v;
                }
            }
        }
        let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for i in 0..n {
            let fi = first[i];
            let row_i = start[i];
            // g_j = l_ij d_j accumulates in place, then is divided by d_j
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = l[row_i + j - fi];
                let gi = &l[row_i + lo - fi..row_i + j - fi];
                let lj = &l[start[j] + lo - fj..start[j] + j - fj];
                for (a, b) in gi.iter().zip(lj) {
                    s -= a * b;
                }
                l[row_i + j - fi] = s;
            }
            let mut di = d[i];
            for j in fi..i {
                let g = l[row_i + j - fi];
                let lij = g / d[j];
                di -= g * lij;
                l[row_i + j - fi] = lij;
            }
            if !(di.abs() > 1e-14 * scale) || !di.is_finite() {
                return Err(Error::Factorization(format!("pivot {i} is {di:e} (singular shift)")));
            }
            d[i] = di;
        }
        Ok(Self { n, perm: perm.to_vec(), first, start, l, d })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored off-diagonal envelope entries.
    pub fn envelope_size(&self) -> usize {
        self.l.len()
    }

    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut z: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.l[self.start[i]..self.start[i + 1]];
            let s: f64 = row.iter().zip(&z[fi..i]).map(|(a, b)| a * b).sum();
            z[i] -= s;
        }
        for (zi, di) in z.iter_mut().zip(&self.d) {
            *zi /= di;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = z[i];
            let row = &self.l[self.start[i]..self.start[i + 1]];
            for (zk, a) in z[fi..i].iter_mut().zip(row) {
                *zk -= a * xi;
            }
        }
        let mut x = alloc::vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = z[new];
        }
        x
    }
}
