//! Sparse storage and the matrix-vector kernels the solver is built on.
//!
//! The constraint matrix is kept in both compressed-row and compressed-column
//! layout so that `Gx` and `Gᵀy` are both plain sequential sweeps.

use crate::error::{check_len, PdcsError, Result};
use crate::scalar::Scalar;

/// Sparse `m × n` matrix stored in CSR and CSC simultaneously.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    nrows: usize,
    ncols: usize,
    // CSR
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    row_vals: Vec<T>,
    // CSC
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<T>,
}

/// Per-row and per-column absolute-value norms.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixNorms<T> {
    pub row_inf: Vec<T>,
    pub col_inf: Vec<T>,
    pub row_2: Vec<T>,
    pub col_2: Vec<T>,
    /// Maximum absolute row sum.
    pub inf_norm: T,
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            row_cols: Vec::new(),
            row_vals: Vec::new(),
            col_ptr: vec![0; ncols + 1],
            col_rows: Vec::new(),
            col_vals: Vec::new(),
        }
    }

    /// Builds a matrix from coordinate triplets. Duplicate coordinates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        rows: &[usize],
        cols: &[usize],
        vals: &[T],
    ) -> Result<Self> {
        check_len("triplet columns", rows.len(), cols.len())?;
        check_len("triplet values", rows.len(), vals.len())?;
        let mut trip: Vec<(usize, usize, T)> = Vec::with_capacity(rows.len());
        for ((&r, &c), &v) in rows.iter().zip(cols).zip(vals) {
            if r >= nrows || c >= ncols {
                return Err(PdcsError::DimensionMismatch {
                    context: "triplet index out of range",
                    expected: if r >= nrows { nrows } else { ncols },
                    got: if r >= nrows { r } else { c },
                });
            }
            trip.push((r, c, v));
        }
        trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, T)> = Vec::with_capacity(trip.len());
        for (r, c, v) in trip {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        Ok(Self::from_sorted_unique(nrows, ncols, &merged))
    }

    fn from_sorted_unique(nrows: usize, ncols: usize, entries: &[(usize, usize, T)]) -> Self {
        let nnz = entries.len();
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut row_cols = Vec::with_capacity(nnz);
        let mut row_vals = Vec::with_capacity(nnz);
        for &(r, c, v) in entries {
            row_ptr[r + 1] += 1;
            row_cols.push(c);
            row_vals.push(v);
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }

        let mut col_ptr = vec![0usize; ncols + 1];
        for &(_, c, _) in entries {
            col_ptr[c + 1] += 1;
        }
        for j in 0..ncols {
            col_ptr[j + 1] += col_ptr[j];
        }
        let mut next = col_ptr.clone();
        let mut col_rows = vec![0usize; nnz];
        let mut col_vals = vec![T::zero(); nnz];
        // entries are row-major, so rows come out increasing within each column
        for &(r, c, v) in entries {
            let k = next[c];
            col_rows[k] = r;
            col_vals[k] = v;
            next[c] += 1;
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            row_cols,
            row_vals,
            col_ptr,
            col_rows,
            col_vals,
        }
    }

    /// Dense row-major constructor, zeros are skipped.
    pub fn from_dense(nrows: usize, ncols: usize, data: &[T]) -> Result<Self> {
        check_len("dense data", nrows * ncols, data.len())?;
        let entries: Vec<_> = (0..nrows)
            .flat_map(|i| (0..ncols).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let v = data[i * ncols + j];
                (v != T::zero()).then_some((i, j, v))
            })
            .collect();
        Ok(Self::from_sorted_unique(nrows, ncols, &entries))
    }

    pub fn identity(n: usize) -> Self {
        let entries: Vec<_> = (0..n).map(|i| (i, i, T::one())).collect();
        Self::from_sorted_unique(n, n, &entries)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.row_vals.len()
    }

    /// Row-major `(row, col, value)` triplets.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.row_cols[k], self.row_vals[k]))
        })
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.row_cols[r.clone()], &self.row_vals[r])
    }

    pub fn col(&self, j: usize) -> (&[usize], &[T]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.col_rows[r.clone()], &self.col_vals[r])
    }

    pub fn values(&self) -> &[T] {
        &self.row_vals
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.nrows * self.ncols];
        for (i, j, v) in self.triplets() {
            out[i * self.ncols + j] = v;
        }
        out
    }

    pub fn spmv(&self, x: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.nrows];
        self.spmv_into(x, &mut out)?;
        Ok(out)
    }

    /// `out = A x`, summing each row in stored (column-increasing) order.
    pub fn spmv_into(&self, x: &[T], out: &mut [T]) -> Result<()> {
        check_len("spmv input", self.ncols, x.len())?;
        check_len("spmv output", self.nrows, out.len())?;
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.row_vals[k] * x[self.row_cols[k]];
            }
            *o = acc;
        }
        Ok(())
    }

    pub fn spmv_t(&self, y: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.ncols];
        self.spmv_t_into(y, &mut out)?;
        Ok(out)
    }

    /// `out = Aᵀ y` using the column layout.
    pub fn spmv_t_into(&self, y: &[T], out: &mut [T]) -> Result<()> {
        check_len("spmv_t input", self.nrows, y.len())?;
        check_len("spmv_t output", self.ncols, out.len())?;
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                acc += self.col_vals[k] * y[self.col_rows[k]];
            }
            *o = acc;
        }
        Ok(())
    }

    pub fn norms(&self) -> MatrixNorms<T> {
        let mut row_inf = vec![T::zero(); self.nrows];
        let mut row_2 = vec![T::zero(); self.nrows];
        let mut inf_norm = T::zero();
        for i in 0..self.nrows {
            let (_, vals) = self.row(i);
            let mut sum = T::zero();
            for &v in vals {
                let a = v.abs();
                row_inf[i] = row_inf[i].max(a);
                row_2[i] += a * a;
                sum += a;
            }
            row_2[i] = row_2[i].sqrt();
            inf_norm = inf_norm.max(sum);
        }
        let mut col_inf = vec![T::zero(); self.ncols];
        let mut col_2 = vec![T::zero(); self.ncols];
        for j in 0..self.ncols {
            let (_, vals) = self.col(j);
            for &v in vals {
                let a = v.abs();
                col_inf[j] = col_inf[j].max(a);
                col_2[j] += a * a;
            }
            col_2[j] = col_2[j].sqrt();
        }
        MatrixNorms {
            row_inf,
            col_inf,
            row_2,
            col_2,
            inf_norm,
        }
    }

    /// Absolute row sums and column sums.
    pub fn abs_sums(&self) -> (Vec<T>, Vec<T>) {
        let rows = (0..self.nrows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum())
            .collect();
        let cols = (0..self.ncols)
            .map(|j| self.col(j).1.iter().map(|v| v.abs()).sum())
            .collect();
        (rows, cols)
    }

    /// Returns `diag(1/row_div) · A · diag(1/col_div)`.
    pub fn scaled(&self, row_div: &[T], col_div: &[T]) -> Self {
        debug_assert_eq!(row_div.len(), self.nrows);
        debug_assert_eq!(col_div.len(), self.ncols);
        let mut out = self.clone();
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.row_vals[k] = self.row_vals[k] / (row_div[i] * col_div[self.row_cols[k]]);
            }
        }
        for j in 0..self.ncols {
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                out.col_vals[k] = self.col_vals[k] / (row_div[self.col_rows[k]] * col_div[j]);
            }
        }
        out
    }

    /// Estimates `‖A‖₂` by power iteration on `AᵀA` from the normalized all-ones vector.
    /// Stops after `max_iters` or when the estimate changes by less than `rel_tol`.
    pub fn estimate_spectral_norm(&self, max_iters: usize, rel_tol: T) -> T {
        if self.nnz() == 0 || self.ncols == 0 {
            return T::zero();
        }
        let n = self.ncols;
        let mut v = vec![T::one() / T::lit(n as f64).sqrt(); n];
        let mut av = vec![T::zero(); self.nrows];
        let mut w = vec![T::zero(); n];
        let mut est = T::zero();
        for _ in 0..max_iters {
            self.spmv_into(&v, &mut av).expect("dims");
            self.spmv_t_into(&av, &mut w).expect("dims");
            let nw = crate::scalar::norm2(&w);
            if nw == T::zero() {
                return T::zero();
            }
            let next = nw.sqrt();
            for (vi, &wi) in v.iter_mut().zip(&w) {
                *vi = wi / nw;
            }
            let done = (next - est).abs() <= rel_tol * next;
            est = next;
            if done {
                break;
            }
        }
        est
    }
}

/// Wraps a matrix and counts every product taken through it.
#[derive(Debug)]
pub struct CountingOperator<'a, T> {
    mat: &'a SparseMatrix<T>,
    spmv: u64,
    spmv_t: u64,
}

impl<'a, T: Scalar> CountingOperator<'a, T> {
    pub fn new(mat: &'a SparseMatrix<T>) -> Self {
        Self {
            mat,
            spmv: 0,
            spmv_t: 0,
        }
    }

    pub fn matrix(&self) -> &'a SparseMatrix<T> {
        self.mat
    }

    pub fn apply(&mut self, x: &[T], out: &mut [T]) {
        self.spmv += 1;
        self.mat.spmv_into(x, out).expect("operator dimensions");
    }

    pub fn apply_t(&mut self, y: &[T], out: &mut [T]) {
        self.spmv_t += 1;
        self.mat.spmv_t_into(y, out).expect("operator dimensions");
    }

    pub fn spmv_count(&self) -> u64 {
        self.spmv
    }

    pub fn spmv_t_count(&self) -> u64 {
        self.spmv_t
    }

    pub fn total(&self) -> u64 {
        self.spmv + self.spmv_t
    }
}
