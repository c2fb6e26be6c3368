use crate::error::{Error, Result};
use crate::la::dense::DenseMatrix;
use crate::la::operator::LinearOperator;
use crate::Real;

/// Compressed-sparse-row matrix.
///
/// Column indices are strictly increasing within each row. The `symmetric`
/// flag is only set when `value(i, j) == value(j, i)` holds bit-for-bit.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
    symmetric: bool,
}

/// Coordinate-list accumulator used during assembly.
#[derive(Clone, Debug)]
pub struct CooBuilder<T> {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> CooBuilder<T> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.entries.push((i, j, v));
    }

    /// Compresses to CSR. Duplicates are summed in insertion order after a
    /// stable sort on `(row, col)`, so the result is bit-reproducible.
    /// With `keep_zeros == false`, entries whose sum is exactly zero are dropped.
    pub fn build(mut self, keep_zeros: bool) -> CsrMatrix<T> {
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values = Vec::with_capacity(self.entries.len());
        let mut rows = Vec::with_capacity(self.entries.len());

        let mut k = 0;
        while k < self.entries.len() {
            let (i, j, mut v) = self.entries[k];
            k += 1;
            while k < self.entries.len() && self.entries[k].0 == i && self.entries[k].1 == j {
                v += self.entries[k].2;
                k += 1;
            }
            if keep_zeros || v != T::zero() {
                rows.push(i);
                col_idx.push(j);
                values.push(v);
            }
        }
        for &i in &rows {
            row_ptr[i + 1] += 1;
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut m = CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        };
        m.symmetric = m.check_symmetric();
        m
    }
}

impl<T: Real> CsrMatrix<T> {
    pub fn from_raw(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        if row_ptr.len() != nrows + 1 || col_idx.len() != values.len() || row_ptr[nrows] != values.len() {
            return Err(Error::DimensionMismatch("inconsistent CSR arrays".into()));
        }
        for i in 0..nrows {
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= ncols) {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has unsorted or out-of-range column indices"
                )));
            }
        }
        let mut m = Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        };
        m.symmetric = m.check_symmetric();
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let n = d.len();
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: d.to_vec(),
            symmetric: true,
        }
    }

    /// Sparse copy of a dense matrix, dropping exact zeros.
    pub fn from_dense(a: &DenseMatrix<T>) -> Self {
        let mut b = CooBuilder::new(a.nrows(), a.ncols());
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                b.push(i, j, a[(i, j)]);
            }
        }
        b.build(false)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn column_indices(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    fn check_symmetric(&self) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (cj, vj) = self.row(j);
                match cj.binary_search(&i) {
                    Ok(k) if vj[k] == v => {}
                    _ => return false,
                }
            }
        }
        true
    }

    /// y = A x
    pub fn spmv(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut s = T::zero();
            for (&j, &v) in cols.iter().zip(vals) {
                s += v * x[j];
            }
            *yi = s;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.spmv(x, &mut y);
        y
    }

    /// Checked mat-vec.
    pub fn try_mul_vec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, vector has length {}",
                self.ncols,
                x.len()
            )));
        }
        Ok(self.mul_vec(x))
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> T {
        self.diagonal().into_iter().sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.values.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.nrows).map(|i| self.row(i).1.iter().copied().sum()).collect()
    }

    pub fn scaled(&self, a: T) -> Self {
        let mut m = self.clone();
        for v in m.values.iter_mut() {
            *v *= a;
        }
        m
    }

    /// `a * X + b * Y` on the union sparsity pattern.
    pub fn lincomb(a: T, x: &Self, b: T, y: &Self) -> Result<Self> {
        if x.nrows != y.nrows || x.ncols != y.ncols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                x.nrows, x.ncols, y.nrows, y.ncols
            )));
        }
        let mut row_ptr = Vec::with_capacity(x.nrows + 1);
        let mut col_idx = Vec::with_capacity(x.nnz().max(y.nnz()));
        let mut values = Vec::with_capacity(x.nnz().max(y.nnz()));
        row_ptr.push(0);
        for i in 0..x.nrows {
            let (cx, vx) = x.row(i);
            let (cy, vy) = y.row(i);
            let (mut p, mut q) = (0, 0);
            while p < cx.len() || q < cy.len() {
                let jx = cx.get(p).copied().unwrap_or(usize::MAX);
                let jy = cy.get(q).copied().unwrap_or(usize::MAX);
                if jx == jy {
                    col_idx.push(jx);
                    values.push(a * vx[p] + b * vy[q]);
                    p += 1;
                    q += 1;
                } else if jx < jy {
                    col_idx.push(jx);
                    values.push(a * vx[p]);
                    p += 1;
                } else {
                    col_idx.push(jy);
                    values.push(b * vy[q]);
                    q += 1;
                }
            }
            row_ptr.push(col_idx.len());
        }
        let mut m = Self {
            nrows: x.nrows,
            ncols: x.ncols,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        };
        m.symmetric = x.symmetric && y.symmetric || m.check_symmetric();
        Ok(m)
    }

    /// Adds `shift` to every diagonal entry.
    pub fn shifted(&self, shift: T) -> Self {
        let n = self.nrows;
        let id = Self::identity(n);
        Self::lincomb(T::one(), self, shift, &id).expect("square matrix")
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut row_ptr = vec![0usize];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut acc = vec![T::zero(); other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut touched = Vec::new();
        for i in 0..self.nrows {
            touched.clear();
            let (ca, va) = self.row(i);
            for (&k, &a) in ca.iter().zip(va) {
                let (cb, vb) = other.row(k);
                for (&j, &b) in cb.iter().zip(vb) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = T::zero();
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_idx.push(j);
                values.push(acc[j]);
            }
            row_ptr.push(col_idx.len());
        }
        let mut m = Self {
            nrows: self.nrows,
            ncols: other.ncols,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        };
        m.symmetric = m.check_symmetric();
        Ok(m)
    }

    pub fn transpose(&self) -> Self {
        let mut b = CooBuilder::with_capacity(self.ncols, self.nrows, self.nnz());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                b.push(j, i, v);
            }
        }
        b.build(true)
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut bw = 0;
        for i in 0..self.nrows {
            let (cols, _) = self.row(i);
            if let (Some(&first), Some(&last)) = (cols.first(), cols.last()) {
                bw = bw.max(i.saturating_sub(first)).max(last.saturating_sub(i));
            }
        }
        bw
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// Same sparsity pattern (values ignored).
    pub fn same_pattern(&self, other: &Self) -> bool {
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
    }
}

impl<T: Real> LinearOperator<T> for CsrMatrix<T> {
    fn dim(&self) -> usize {
        self.nrows
    }

    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        if x.len() != self.ncols || y.len() != self.nrows {
            return Err(Error::DimensionMismatch(format!(
                "spmv with {}x{} matrix, x len {}, y len {}",
                self.nrows,
                self.ncols,
                x.len(),
                y.len()
            )));
        }
        self.spmv(x, y);
        Ok(())
    }
}
