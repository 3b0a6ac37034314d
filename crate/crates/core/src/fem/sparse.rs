use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Symmetric matrix in compressed-row form holding only the lower triangle
/// (column ≤ row); the diagonal is always present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSymmetricMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymmetricMatrix {
    /// Sums duplicate `(row, col, value)` entries. Entries above the diagonal
    /// are mirrored into the lower triangle.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        for t in triplets.iter_mut() {
            if t.1 > t.0 {
                core::mem::swap(&mut t.0, &mut t.1);
            }
        }
        triplets.extend((0..n).map(|i| (i, i, 0.0)));
        // stable sort keeps the summation order of duplicates reproducible
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = alloc::vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *vals.last_mut().expect("entry exists") += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored (lower-triangle) entries.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Column indices and values of the lower part of row `i` (diagonal last).
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        let (c, v) = self.row(i);
        c.binary_search(&j).map(|k| v[k]).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| *self.row(i).1.last().expect("diagonal stored")).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = alloc::vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let (c, v) = self.row(i);
            let mut acc = 0.0;
            for (&j, &a) in c.iter().zip(v) {
                acc += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
            y[i] += acc;
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        self.mul_vec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Row sums of the full symmetric matrix.
    pub fn row_sums(&self) -> Vec<f64> {
        self.mul_vec(&alloc::vec![1.0; self.n])
    }

    pub fn sum_all(&self) -> f64 {
        self.row_sums().iter().sum()
    }

    /// `a·A + b·B` over the union pattern.
    pub fn combine(a: f64, lhs: &Self, b: f64, rhs: &Self) -> Self {
        assert_eq!(lhs.n, rhs.n, "dimension mismatch");
        let n = lhs.n;
        let mut row_ptr = alloc::vec![0; n + 1];
        let mut cols = Vec::with_capacity(lhs.nnz().max(rhs.nnz()));
        let mut vals = Vec::with_capacity(cols.capacity());
        for i in 0..n {
            let (c1, v1) = lhs.row(i);
            let (c2, v2) = rhs.row(i);
            let (mut p, mut q) = (0, 0);
            while p < c1.len() || q < c2.len() {
                let j1 = c1.get(p).copied().unwrap_or(usize::MAX);
                let j2 = c2.get(q).copied().unwrap_or(usize::MAX);
                let j = j1.min(j2);
                let mut v = 0.0;
                if j1 == j {
                    v += a * v1[p];
                    p += 1;
                }
                if j2 == j {
                    v += b * v2[q];
                    q += 1;
                }
                cols.push(j);
                vals.push(v);
            }
            row_ptr[i + 1] = cols.len();
        }
        Self { n, row_ptr, cols, vals }
    }

    /// Principal submatrix on the indices where `keep` is true, renumbered
    /// in increasing order.
    pub fn restrict(&self, keep: &[bool]) -> Self {
        let mut new_index = alloc::vec![usize::MAX; self.n];
        let mut m = 0;
        for (i, &k) in keep.iter().enumerate() {
            if k {
                new_index[i] = m;
                m += 1;
            }
        }
        let mut row_ptr = alloc::vec![0; m + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in (0..self.n).filter(|&i| keep[i]) {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                if keep[j] {
                    cols.push(new_index[j]);
                    vals.push(a);
                }
            }
            row_ptr[new_index[i] + 1] = cols.len();
        }
        Self { n: m, row_ptr, cols, vals }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut d = alloc::vec![0.0; n * n];
        for i in 0..n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                d[i * n + j] = a;
                d[j * n + i] = a;
            }
        }
        d
    }

    /// Largest absolute row sum of the full matrix.
    pub fn norm_inf(&self) -> f64 {
        let mut s = alloc::vec![0.0; self.n];
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                s[i] += a.abs();
                if j != i {
                    s[j] += a.abs();
                }
            }
        }
        s.into_iter().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sample() -> SparseSymmetricMatrix {
        SparseSymmetricMatrix::from_triplets(
            3,
            vec![(0, 0, 2.0), (1, 0, -1.0), (0, 1, 0.5), (1, 1, 2.0), (2, 2, 1.0), (2, 1, 3.0)],
        )
    }

    #[test]
    fn duplicates_are_summed_and_mirrored() {
        let a = sample();
        assert_eq!(a.get(0, 1), -0.5);
        assert_eq!(a.get(1, 0), -0.5);
        assert_eq!(a.get(2, 0), 0.0);
        assert_eq!(a.nnz(), 5);
        assert_eq!(a.diagonal(), vec![2.0, 2.0, 1.0]);
    }

    #[test]
    fn matvec_matches_dense() {
        let a = sample();
        let x = [1.0, -2.0, 0.5];
        let d = a.to_dense();
        let y = a.mul_vec(&x);
        for i in 0..3 {
            let e: f64 = (0..3).map(|j| d[i * 3 + j] * x[j]).sum();
            assert!((y[i] - e).abs() < 1e-15);
        }
    }

    #[test]
    fn combine_and_restrict() {
        let a = sample();
        let c = SparseSymmetricMatrix::combine(1.0, &a, -2.0, &a);
        assert!((c.get(2, 1) + 3.0).abs() < 1e-15);
        let r = a.restrict(&[true, false, true]);
        assert_eq!(r.dim(), 2);
        assert_eq!(r.get(1, 1), 1.0);
        assert_eq!(r.get(1, 0), 0.0);
    }
}
