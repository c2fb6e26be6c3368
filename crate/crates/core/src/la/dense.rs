//! Small dense matrices for diagnostics: LU/Cholesky, Householder
//! Hessenberg reduction with Francis double-shift QR, and the symmetric
//! tridiagonal QL path.

use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::la::operator::{check_dims, LinearOperator};
use crate::Real;

/// Largest order accepted by the dense eigensolvers.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.ncols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.ncols + j]
    }
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![T::zero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        Self::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { T::zero() })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        Self::from_fn(nrows, ncols, |i, j| rows[i][j])
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(cols: &[Vec<T>]) -> Self {
        let ncols = cols.len();
        let nrows = cols.first().map_or(0, Vec::len);
        Self::from_fn(nrows, ncols, |i, j| cols[j][i])
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, b: &Self) -> Self {
        assert_eq!(self.ncols, b.nrows, "dense matmul dimension mismatch");
        let mut c = Self::zeros(self.nrows, b.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let brow = b.row(k);
                let crow = &mut c.data[i * b.ncols..(i + 1) * b.ncols];
                for (cv, &bv) in crow.iter_mut().zip(brow) {
                    *cv += a * bv;
                }
            }
        }
        c
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.nrows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, b: &Self) -> Self {
        Self::from_fn(self.nrows, self.ncols, |i, j| self[(i, j)] + b[(i, j)])
    }

    pub fn sub(&self, b: &Self) -> Self {
        Self::from_fn(self.nrows, self.ncols, |i, j| self[(i, j)] - b[(i, j)])
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(|&v| a * v).collect(),
        }
    }

    pub fn trace(&self) -> T {
        (0..self.nrows.min(self.ncols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut r = Self::identity(self.nrows);
        for _ in 0..k {
            r = r.matmul(self);
        }
        r
    }

    /// Lower-triangular Cholesky factor `L` with `A = L L^T`.
    pub fn cholesky(&self) -> Result<Self> {
        let n = self.nrows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite {
                    operator: "dense".into(),
                    pivot: j,
                    value: d.as_f64(),
                });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(l)
    }

    /// Solves `A X = B` by LU with partial pivoting.
    pub fn solve(&self, b: &Self) -> Result<Self> {
        let n = self.nrows;
        if !self.is_square() || b.nrows != n {
            return Err(Error::DimensionMismatch("dense solve".into()));
        }
        let mut a = self.clone();
        let mut x = b.clone();
        for k in 0..n {
            let (mut piv, mut best) = (k, a[(k, k)].abs());
            for i in k + 1..n {
                if a[(i, k)].abs() > best {
                    best = a[(i, k)].abs();
                    piv = i;
                }
            }
            if best == T::zero() {
                return Err(Error::InvalidParameter("singular dense matrix".into()));
            }
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                }
                for j in 0..x.ncols {
                    x.data.swap(k * x.ncols + j, piv * x.ncols + j);
                }
            }
            let akk = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / akk;
                if f == T::zero() {
                    continue;
                }
                for j in k..n {
                    let v = a[(k, j)];
                    a[(i, j)] -= f * v;
                }
                for j in 0..x.ncols {
                    let v = x[(k, j)];
                    x[(i, j)] -= f * v;
                }
            }
        }
        for k in (0..n).rev() {
            let akk = a[(k, k)];
            for j in 0..x.ncols {
                let mut s = x[(k, j)];
                for i in k + 1..n {
                    s -= a[(k, i)] * x[(i, j)];
                }
                x[(k, j)] = s / akk;
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.nrows))
    }

    /// Eigenvalues of a general real matrix, sorted by real then imaginary part.
    pub fn eigenvalues(&self) -> Result<Vec<Complex<T>>> {
        self.check_dense_size()?;
        let mut h = self.clone();
        balance(&mut h);
        hessenberg(&mut h);
        let mut ev = hqr(&mut h)?;
        sort_complex(&mut ev);
        Ok(ev)
    }

    /// Eigenvalues of a symmetric matrix (only the lower triangle is read), ascending.
    pub fn symmetric_eigenvalues(&self) -> Result<Vec<T>> {
        self.check_dense_size()?;
        let (mut d, mut e) = tridiagonalize(self);
        tql(&mut d, &mut e)?;
        d.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        Ok(d)
    }

    pub fn spectral_radius(&self) -> Result<T> {
        Ok(self
            .eigenvalues()?
            .iter()
            .fold(T::zero(), |m, z| m.max(z.norm())))
    }

    fn check_dense_size(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("eigenvalues of a non-square matrix".into()));
        }
        if self.nrows > DENSE_LIMIT {
            return Err(Error::TooLarge {
                size: self.nrows,
                limit: DENSE_LIMIT,
            });
        }
        Ok(())
    }

    /// `L^{-1} A L^{-T}` for lower-triangular `L`.
    fn congruence_by_inverse(&self, l: &Self) -> Self {
        let n = self.nrows;
        // Y = L^{-1} A
        let mut y = self.clone();
        for j in 0..n {
            for i in 0..n {
                let mut s = y[(i, j)];
                for k in 0..i {
                    s -= l[(i, k)] * y[(k, j)];
                }
                y[(i, j)] = s / l[(i, i)];
            }
        }
        // C = Y L^{-T}  <=>  C^T = L^{-1} Y^T
        let mut c = y.transpose();
        for j in 0..n {
            for i in 0..n {
                let mut s = c[(i, j)];
                for k in 0..i {
                    s -= l[(i, k)] * c[(k, j)];
                }
                c[(i, j)] = s / l[(i, i)];
            }
        }
        c.transpose()
    }
}

impl<T: Real> LinearOperator<T> for DenseMatrix<T> {
    fn dim(&self) -> usize {
        self.nrows
    }
    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("non-square dense operator".into()));
        }
        check_dims(self.nrows, x, y)?;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum();
        }
        Ok(())
    }
}

/// Eigenvalues of `A` or, when `b` is given, of `B^{-1} A` with `B` SPD
/// (reduced through the Cholesky factor of `B`). Sorted by real part.
pub fn dense_eigenvalues<T: Real>(a: &DenseMatrix<T>, b: Option<&DenseMatrix<T>>) -> Result<Vec<Complex<T>>> {
    match b {
        None => a.eigenvalues(),
        Some(b) => {
            a.check_dense_size()?;
            let l = b.cholesky()?;
            a.congruence_by_inverse(&l).eigenvalues()
        }
    }
}

/// Eigenvalues of the symmetric-definite pencil `A x = lambda B x`, ascending.
pub fn generalized_symmetric_eigenvalues<T: Real>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<Vec<T>> {
    a.check_dense_size()?;
    let l = b.cholesky()?;
    let mut c = a.congruence_by_inverse(&l);
    let n = c.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = (c[(i, j)] + c[(j, i)]) * T::lit(0.5);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    c.symmetric_eigenvalues()
}

fn sort_complex<T: Real>(ev: &mut [Complex<T>]) {
    ev.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Diagonal similarity scaling by powers of two so that row and column norms match.
fn balance<T: Real>(a: &mut DenseMatrix<T>) {
    let n = a.nrows();
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let (mut r, mut c) = (T::zero(), T::zero());
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != T::zero() && r != T::zero() {
                let mut g = r / radix;
                let mut f = T::one();
                let s = c + r;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < T::lit(0.95) * s {
                    done = false;
                    let g = T::one() / f;
                    for j in 0..n {
                        a[(i, j)] *= g;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg<T: Real>(a: &mut DenseMatrix<T>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    let mut v = vec![T::zero(); n];
    for k in 0..n - 2 {
        let mut alpha = T::zero();
        for i in k + 1..n {
            alpha += a[(i, k)] * a[(i, k)];
        }
        alpha = alpha.sqrt();
        if alpha == T::zero() {
            continue;
        }
        if a[(k + 1, k)] > T::zero() {
            alpha = -alpha;
        }
        for i in 0..n {
            v[i] = if i > k { a[(i, k)] } else { T::zero() };
        }
        v[k + 1] -= alpha;
        let vnorm2: T = v[k + 1..].iter().map(|&x| x * x).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        let beta = T::lit(2.0) / vnorm2;
        // A <- (I - beta v v^T) A
        for j in k..n {
            let mut s = T::zero();
            for i in k + 1..n {
                s += v[i] * a[(i, j)];
            }
            s *= beta;
            for i in k + 1..n {
                a[(i, j)] -= s * v[i];
            }
        }
        // A <- A (I - beta v v^T)
        for i in 0..n {
            let mut s = T::zero();
            for j in k + 1..n {
                s += a[(i, j)] * v[j];
            }
            s *= beta;
            for j in k + 1..n {
                a[(i, j)] -= s * v[j];
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = T::zero();
        }
    }
}

fn sign<T: Real>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
fn hqr<T: Real>(a: &mut DenseMatrix<T>) -> Result<Vec<Complex<T>>> {
    let n = a.nrows();
    let mut wr = vec![Complex::new(T::zero(), T::zero()); n];
    if n == 0 {
        return Ok(wr);
    }
    let eps = T::epsilon();
    let max_sweeps = 100 * n.max(1);
    let mut sweeps = 0usize;

    let mut anorm = T::zero();
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }

    let mut nn = n as isize - 1;
    let mut t = T::zero();
    let (mut p, mut q, mut r);
    let (mut x, mut y, mut z, mut w);
    while nn >= 0 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l > 0 {
                let lu = l as usize;
                let mut s = a[(lu - 1, lu - 1)].abs() + a[(lu, lu)].abs();
                if s == T::zero() {
                    s = anorm;
                }
                if a[(lu, lu - 1)].abs() <= eps * s {
                    a[(lu, lu - 1)] = T::zero();
                    break;
                }
                l -= 1;
            }
            let nu = nn as usize;
            x = a[(nu, nu)];
            if l == nn {
                wr[nu] = Complex::new(x + t, T::zero());
                nn -= 1;
                break;
            }
            y = a[(nu - 1, nu - 1)];
            w = a[(nu, nu - 1)] * a[(nu - 1, nu)];
            if l == nn - 1 {
                p = T::lit(0.5) * (y - x);
                q = p * p + w;
                z = q.abs().sqrt();
                x += t;
                if q >= T::zero() {
                    z = p + sign(z, p);
                    wr[nu - 1] = Complex::new(x + z, T::zero());
                    wr[nu] = Complex::new(x + z, T::zero());
                    if z != T::zero() {
                        wr[nu] = Complex::new(x - w / z, T::zero());
                    }
                } else {
                    wr[nu] = Complex::new(x + p, -z);
                    wr[nu - 1] = Complex::new(x + p, z);
                }
                nn -= 2;
                break;
            }
            sweeps += 1;
            if sweeps > max_sweeps {
                return Err(Error::EigenNoConvergence(sweeps));
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 0..=nu {
                    a[(i, i)] -= x;
                }
                let s = a[(nu, nu - 1)].abs() + a[(nu - 1, nu - 2)].abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            its += 1;
            let lu = l as usize;
            let mut m = nu - 2;
            loop {
                z = a[(m, m)];
                r = x - z;
                let s0 = y - z;
                p = (r * s0 - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - r - s0;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == lu {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m..nu - 1 {
                a[(i + 2, i)] = T::zero();
                if i != m {
                    a[(i + 2, i - 1)] = T::zero();
                }
            }
            let mut k = m;
            while k + 1 <= nu {
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = T::zero();
                    if k + 1 != nu {
                        r = a[(k + 2, k - 1)];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != T::zero() {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != T::zero() {
                    if k == m {
                        if l as usize != m {
                            a[(k, k - 1)] = -a[(k, k - 1)];
                        }
                    } else {
                        a[(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        p = a[(k, j)] + q * a[(k + 1, j)];
                        if k + 1 != nu {
                            p += r * a[(k + 2, j)];
                            a[(k + 2, j)] -= p * z;
                        }
                        a[(k + 1, j)] -= p * y;
                        a[(k, j)] -= p * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for i in lu..=mmin {
                        p = x * a[(i, k)] + y * a[(i, k + 1)];
                        if k + 1 != nu {
                            p += z * a[(i, k + 2)];
                            a[(i, k + 2)] -= p * r;
                        }
                        a[(i, k + 1)] -= p * q;
                        a[(i, k)] -= p;
                    }
                }
                k += 1;
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Ok(wr)
}

/// Householder tridiagonalization of a symmetric matrix: returns diagonal
/// `d` and subdiagonal `e` (with `e[0]` unused).
fn tridiagonalize<T: Real>(a0: &DenseMatrix<T>) -> (Vec<T>, Vec<T>) {
    let n = a0.nrows();
    let mut a = a0.clone();
    for i in 0..n {
        for j in i + 1..n {
            a[(i, j)] = a[(j, i)];
        }
    }
    let mut e = vec![T::zero(); n];
    let mut v = vec![T::zero(); n];
    let mut pv = vec![T::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let mut alpha = T::zero();
        for i in k + 1..n {
            alpha += a[(i, k)] * a[(i, k)];
        }
        alpha = alpha.sqrt();
        if alpha == T::zero() {
            e[k + 1] = T::zero();
            continue;
        }
        if a[(k + 1, k)] > T::zero() {
            alpha = -alpha;
        }
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm2: T = v[k + 1..n].iter().map(|&x| x * x).sum();
        e[k + 1] = alpha;
        if vnorm2 == T::zero() {
            continue;
        }
        let beta = T::lit(2.0) / vnorm2;
        // p = beta A22 v
        for i in k + 1..n {
            let row = a.row(i);
            let mut s = T::zero();
            for j in k + 1..n {
                s += row[j] * v[j];
            }
            pv[i] = beta * s;
        }
        let mut kk = T::zero();
        for i in k + 1..n {
            kk += v[i] * pv[i];
        }
        kk = kk * beta * T::lit(0.5);
        for i in k + 1..n {
            pv[i] -= kk * v[i];
        }
        for i in k + 1..n {
            let (vi, wi) = (v[i], pv[i]);
            for j in k + 1..n {
                let upd = vi * pv[j] + wi * v[j];
                a[(i, j)] -= upd;
            }
        }
    }
    if n >= 2 {
        e[n - 1] = a[(n - 1, n - 2)];
    }
    let d = (0..n).map(|i| a[(i, i)]).collect();
    (d, e)
}

/// Implicit QL on a symmetric tridiagonal matrix; eigenvalues returned in `d`.
fn tql<T: Real>(d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let max_sweeps = 100 * n;
    let mut sweeps = 0;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > max_sweeps {
                return Err(Error::EigenNoConvergence(sweeps));
            }
            let mut g = (d[l + 1] - d[l]) / (T::lit(2.0) * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + sign(r, g));
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut i = m as isize - 1;
            let mut early = false;
            while i >= l as isize {
                let iu = i as usize;
                let f = s * e[iu];
                let b = c * e[iu];
                r = f.hypot(g);
                e[iu + 1] = r;
                if r == T::zero() {
                    d[iu + 1] -= p;
                    e[m] = T::zero();
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[iu + 1] - p;
                r = (d[iu] - g) * s + T::lit(2.0) * c * b;
                p = s * r;
                d[iu + 1] = g + p;
                g = c * r - b;
                i -= 1;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn diagonal_spectrum_sorted() {
        let a = DenseMatrix::from_diagonal(&[3.0, 1.0, 2.0]);
        let ev = a.eigenvalues().unwrap();
        let re: Vec<f64> = ev.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![1.0, 2.0, 3.0]);
        assert_eq!(a.symmetric_eigenvalues().unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let a = DenseMatrix::<f64>::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
        let ev = a.eigenvalues().unwrap();
        assert!(ev.iter().all(|z| z.re.abs() < 1e-10 && (z.im.abs() - 1.0).abs() < 1e-10));
        assert!(ev[0].im * ev[1].im < 0.0);
    }

    #[test]
    fn symmetric_trace_identity() {
        let r = random_matrix(50, 7);
        let a = r.add(&r.transpose());
        let tr = a.trace();
        let sum_sym: f64 = a.symmetric_eigenvalues().unwrap().iter().sum();
        let sum_gen: f64 = a.eigenvalues().unwrap().iter().map(|z| z.re).sum();
        let scale = a.frobenius_norm();
        assert!((sum_sym - tr).abs() <= 1e-8 * scale);
        assert!((sum_gen - tr).abs() <= 1e-8 * scale);
    }

    #[test]
    fn nonsymmetric_matches_characteristic_checks() {
        let a = random_matrix(40, 11);
        let ev = a.eigenvalues().unwrap();
        let tr: f64 = ev.iter().map(|z| z.re).sum();
        let im: f64 = ev.iter().map(|z| z.im).sum();
        assert!((tr - a.trace()).abs() < 1e-9);
        assert!(im.abs() < 1e-9);
        // trace(A^2) = sum lambda^2
        let tr2: f64 = ev.iter().map(|z| (z * z).re).sum();
        assert!((tr2 - a.matmul(&a).trace()).abs() < 1e-8);
    }

    #[test]
    fn generalized_matches_explicit_inverse() {
        let r = random_matrix(8, 3);
        let b = r.matmul(&r.transpose()).add(&DenseMatrix::identity(8));
        let s = random_matrix(8, 4);
        let a = s.add(&s.transpose());
        let gen = generalized_symmetric_eigenvalues(&a, &b).unwrap();
        let explicit = b.inverse().unwrap().matmul(&a);
        let ev = explicit.eigenvalues().unwrap();
        for (g, z) in gen.iter().zip(&ev) {
            assert!((g - z.re).abs() < 1e-9, "{g} vs {z}");
        }
        let via = dense_eigenvalues(&a, Some(&b)).unwrap();
        for (g, z) in gen.iter().zip(&via) {
            assert!((g - z.re).abs() < 1e-9);
        }
    }

    #[test]
    fn lu_inverse_roundtrip() {
        let a = random_matrix(12, 5).add(&DenseMatrix::identity(12).scaled(4.0));
        let prod = a.matmul(&a.inverse().unwrap());
        assert!(prod.sub(&DenseMatrix::identity(12)).max_abs() < 1e-12);
    }

    #[test]
    fn oversized_is_refused() {
        let a = DenseMatrix::<f64>::zeros(DENSE_LIMIT + 1, DENSE_LIMIT + 1);
        assert!(matches!(a.eigenvalues(), Err(Error::TooLarge { .. })));
    }
}
