//! Compressed sparse row matrices.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// CSR matrix. Column indices are sorted and unique within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: vec![],
            values: vec![],
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let mut m = Self::identity(d.len());
        m.values.copy_from_slice(d);
        m
    }

    /// Sums duplicate entries; the result does not depend on triplet order
    /// beyond floating point summation order within an entry.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        if let Some(&(i, j, _)) = triplets.iter().find(|t| t.0 >= nrows || t.1 >= ncols) {
            return Err(Error::InvalidArgument(format!(
                "triplet ({i}, {j}) outside a {nrows}x{ncols} matrix"
            )));
        }
        let mut count = vec![0usize; nrows + 1];
        for t in triplets {
            count[t.0 + 1] += 1;
        }
        for i in 0..nrows {
            count[i + 1] += count[i];
        }
        // stable bucket sort by row keeps insertion order within a row
        let mut order = vec![0usize; triplets.len()];
        let mut next = count.clone();
        for (k, t) in triplets.iter().enumerate() {
            order[next[t.0]] = k;
            next[t.0] += 1;
        }
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut row: Vec<(usize, T)> = Vec::new();
        for i in 0..nrows {
            row.clear();
            row.extend(
                order[count[i]..count[i + 1]]
                    .iter()
                    .map(|&k| (triplets[k].1, triplets[k].2)),
            );
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = row[k].1;
                k += 1;
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                col_idx.push(c);
                values.push(v);
            }
            row_ptr[i + 1] = col_idx.len();
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(k) => v[k],
            Err(_) => T::zero(),
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            t.extend(c.iter().zip(v).map(|(&j, &x)| (i, j, x)));
        }
        t
    }

    pub fn transpose(&self) -> Self {
        let mut count = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            count[j + 1] += 1;
        }
        for j in 0..self.ncols {
            count[j + 1] += count[j];
        }
        let mut next = count.clone();
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                col_idx[next[j]] = i;
                values[next[j]] = x;
                next[j] += 1;
            }
        }
        SparseMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr: count,
            col_idx,
            values,
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> SparseMatrix<U> {
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        (0..self.nrows)
            .into_par_iter()
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum()
            })
            .collect()
    }

    /// `y += alpha A x` for a scalar type that real matrices can act on.
    pub fn matvec_add<U: Scalar + std::ops::Mul<T, Output = U>>(&self, alpha: U, x: &[U], y: &mut [U]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let (c, v) = self.row(i);
            let mut s = U::zero();
            for (&j, &a) in c.iter().zip(v) {
                s += x[j] * a;
            }
            *yi += alpha * s;
        });
    }

    /// `A + B` (same shape).
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut t = self.triplets();
        t.extend(other.triplets());
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    /// `A + s B`
    pub fn add_scaled(&self, s: T, other: &Self) -> Result<Self> {
        self.add(&other.scale(s))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if (self.nrows, self.ncols) != (other.nrows, other.ncols) {
            return Err(Error::Structure(format!(
                "{}x{} and {}x{} matrices",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        Ok(())
    }

    /// Sparse product `A B`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.weighted_matmul(None, other)
    }

    /// `A diag(w) B` with optional diagonal weights between the factors.
    pub fn weighted_matmul(&self, w: Option<&[T]>, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::Structure(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        if let Some(w) = w {
            assert_eq!(w.len(), self.ncols);
        }
        let rows: Vec<(Vec<usize>, Vec<T>)> = (0..self.nrows)
            .into_par_iter()
            .map_init(
                || (vec![T::zero(); other.ncols], vec![false; other.ncols]),
                |(acc, used), i| {
                    let mut cols = Vec::new();
                    let (ca, va) = self.row(i);
                    for (&k, &a) in ca.iter().zip(va) {
                        let a = match w {
                            Some(w) => a * w[k],
                            None => a,
                        };
                        let (cb, vb) = other.row(k);
                        for (&j, &b) in cb.iter().zip(vb) {
                            if !used[j] {
                                used[j] = true;
                                cols.push(j);
                            }
                            acc[j] += a * b;
                        }
                    }
                    cols.sort_unstable();
                    let vals = cols
                        .iter()
                        .map(|&j| {
                            used[j] = false;
                            std::mem::take(&mut acc[j])
                        })
                        .collect();
                    (cols, vals)
                },
            )
            .collect();
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        row_ptr.push(0);
        let nnz = rows.iter().map(|r| r.0.len()).sum();
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for (c, v) in rows {
            col_idx.extend(c);
            values.extend(v);
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix {
            nrows: self.nrows,
            ncols: other.ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                row[j] = x;
            }
        }
        d
    }

    /// Drops explicitly stored zeros.
    pub fn prune(&self) -> Self {
        let t: Vec<_> = self.triplets().into_iter().filter(|t| t.2 != T::zero()).collect();
        Self::from_triplets(self.nrows, self.ncols, &t).expect("indices already valid")
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

impl SparseMatrix<f64> {
    pub fn to_complex(&self) -> SparseMatrix<num_complex::Complex64> {
        self.map(|v| num_complex::Complex64::new(v, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let a = SparseMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (0, 0, 2.0), (0, 2, 3.0), (1, 1, -1.0)]).unwrap();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 2), 4.0);
        assert_eq!(a.row(0).0, &[0, 2]);
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), vec![6.0, -1.0]);
        assert!(SparseMatrix::<f64>::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn transpose_and_products() {
        let a = SparseMatrix::from_triplets(3, 2, &[(0, 0, 1.0), (1, 0, 2.0), (1, 1, 3.0), (2, 1, 4.0)]).unwrap();
        let at = a.transpose();
        assert_eq!(at.to_dense(), vec![vec![1.0, 2.0, 0.0], vec![0.0, 3.0, 4.0]]);
        // Aᵀ diag(w) A
        let w = [1.0, 2.0, 3.0];
        let p = at.weighted_matmul(Some(&w), &a).unwrap();
        let expect = [
            [1.0 + 2.0 * 4.0, 2.0 * 2.0 * 3.0],
            [2.0 * 2.0 * 3.0, 2.0 * 9.0 + 3.0 * 16.0],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(p.get(i, j), expect[i][j]);
            }
        }
        assert!(a.matmul(&a).is_err());
        let s = a.add(&a.scale(-1.0)).unwrap().prune();
        assert_eq!(s.nnz(), 0);
    }
}
