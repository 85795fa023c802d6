//! Dense linear algebra used throughout the crate.
//!
//! Everything here is small and dense: the matrices are frame operators
//! (`n x n`), synthesis matrices (`n x m`) and Gram matrices of selections.
//! Eigenvalues of symmetric matrices come from cyclic Jacobi rotations and
//! singular values from one-sided (Hestenes) Jacobi, both of which are
//! deterministic and accurate for the tiny singular values the certificates
//! depend on.

use std::ops::{Index, IndexMut};

use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row slices. All rows must have equal length.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// Builds an `len x columns.len()` matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[T]>>(len: usize, columns: &[C]) -> Self {
        let mut m = Self::zeros(len, columns.len());
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            assert_eq!(c.len(), len, "column length mismatch");
            for (i, &v) in c.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `A Aᵀ`, the frame operator when the columns are frame vectors.
    pub fn outer_gram(&self) -> Self {
        let mut out = Self::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in i..self.rows {
                let v = dot(self.row(i), self.row(j));
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    /// `Aᵀ A`, the Gram matrix of the columns.
    pub fn inner_gram(&self) -> Self {
        self.transpose().outer_gram()
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, idx.len());
        for (jj, &j) in idx.iter().enumerate() {
            for i in 0..self.rows {
                out[(i, jj)] = self[(i, j)];
            }
        }
        out
    }

    /// Principal submatrix on the index set `idx`.
    pub fn principal(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out[(a, b)] = self[(i, j)];
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &a| acc.max(a.abs()))
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|&a| a * a).sum::<T>().sqrt()
    }

    /// Largest absolute asymmetry `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> T {
        assert!(self.is_square());
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Spectral norm (largest singular value).
    pub fn spectral_norm(&self) -> T {
        singular_values(self).first().copied().unwrap_or_else(T::zero)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

pub fn scaled<T: Scalar>(x: &[T], s: T) -> Vec<T> {
    x.iter().map(|&v| v * s).collect()
}

/// Eigendecomposition of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEigen<T> {
    /// Eigenvalues in descending order.
    pub values: Vec<T>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: Matrix<T>,
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Only the upper triangle is trusted; the input is symmetrized first.
pub fn sym_eigen<T: Scalar>(a: &Matrix<T>) -> SymEigen<T> {
    assert!(a.is_square(), "sym_eigen needs a square matrix");
    let n = a.rows();
    let mut m = a.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = (m[(i, j)] + m[(j, i)]) / T::lit(2.0);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    let mut v = Matrix::identity(n);
    jacobi_diagonalize(&mut m, &mut v);
    sorted_eigen(m, v)
}

/// Eigendecomposition of `basisᵀ · a · basis` continued from an orthogonal
/// `basis` that already nearly diagonalizes `a`. The returned vectors are
/// expressed in the original coordinates.
pub fn sym_eigen_warm<T: Scalar>(a: &Matrix<T>, basis: &Matrix<T>) -> SymEigen<T> {
    let mut m = basis.transpose().matmul(a).matmul(basis);
    let n = m.rows();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = (m[(i, j)] + m[(j, i)]) / T::lit(2.0);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    let mut v = Matrix::identity(n);
    jacobi_diagonalize(&mut m, &mut v);
    let v = basis.matmul(&v);
    sorted_eigen(m, v)
}

fn sorted_eigen<T: Scalar>(m: Matrix<T>, v: Matrix<T>) -> SymEigen<T> {
    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep their input order
    order.sort_by(|&i, &j| {
        m[(j, j)]
            .partial_cmp(&m[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = v.select_columns(&order);
    SymEigen { values, vectors }
}

fn jacobi_diagonalize<T: Scalar>(m: &mut Matrix<T>, v: &mut Matrix<T>) {
    let n = m.rows();
    if n < 2 {
        return;
    }
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag = diag + m[(i, i)] * m[(i, i)];
            for j in (i + 1)..n {
                off = off + m[(i, j)] * m[(i, j)];
            }
        }
        if off == T::zero() || off.sqrt() <= eps * (diag + off).sqrt() * T::lit(0.5) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                if apq.abs() <= eps * T::lit(0.25) * (app.abs().min(aqq.abs())) {
                    m[(p, q)] = T::zero();
                    m[(q, p)] = T::zero();
                    continue;
                }
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = if theta.abs() > T::lit(1e150).min(T::max_value().sqrt()) {
                    T::one() / (T::lit(2.0) * theta)
                } else {
                    let sgn = if theta >= T::zero() { T::one() } else { -T::one() };
                    sgn / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                rotate(m, v, p, q, c, s);
            }
        }
    }
}

fn rotate<T: Scalar>(m: &mut Matrix<T>, v: &mut Matrix<T>, p: usize, q: usize, c: T, s: T) {
    let n = m.rows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = T::zero();
    m[(q, p)] = T::zero();
    for k in 0..v.rows() {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Singular values in descending order, `min(rows, cols)` of them.
pub fn singular_values<T: Scalar>(a: &Matrix<T>) -> Vec<T> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    // one-sided Jacobi acts on columns; keep the column count small
    let cols = if a.cols() <= a.rows() {
        a.columns()
    } else {
        a.to_rows()
    };
    singular_values_of_columns(cols)
}

/// Singular values of the matrix whose columns are `cols` (all of equal
/// length). Returns `cols.len()` values in descending order, padding with
/// zeros is left to the caller when there are more columns than rows.
pub fn singular_values_of_columns<T: Scalar>(mut cols: Vec<Vec<T>>) -> Vec<T> {
    let k = cols.len();
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let sgn = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sgn / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                let up = &mut left[p];
                let uq = &mut right[0];
                for (a, b) in up.iter_mut().zip(uq.iter_mut()) {
                    let x = *a;
                    let y = *b;
                    *a = c * x - s * y;
                    *b = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = cols.iter().map(|c| norm(c)).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Smallest singular value of the `dim x cols.len()` matrix with the given
/// columns; zero when there are more columns than `dim`.
pub fn min_singular_value<T: Scalar>(dim: usize, cols: &[Vec<T>]) -> T {
    if cols.is_empty() {
        return T::zero();
    }
    if cols.len() > dim {
        return T::zero();
    }
    *singular_values_of_columns(cols.to_vec())
        .last()
        .expect("nonempty")
}

/// Largest singular value of the matrix with the given columns.
pub fn max_singular_value<T: Scalar>(dim: usize, cols: &[Vec<T>]) -> T {
    if cols.is_empty() {
        return T::zero();
    }
    let m = Matrix::from_columns(dim, cols);
    m.spectral_norm()
}

/// Orthonormal basis of the span of `vectors` by modified Gram-Schmidt with
/// one reorthogonalization pass. A vector is dropped when its residual falls
/// to `rel_tol` times its own norm or below.
pub fn orthonormal_basis<T: Scalar>(vectors: &[Vec<T>], rel_tol: T) -> Vec<Vec<T>> {
    let mut basis: Vec<Vec<T>> = Vec::new();
    for v in vectors {
        let nv = norm(v);
        if nv == T::zero() {
            continue;
        }
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &r);
                axpy(-c, q, &mut r);
            }
        }
        let nr = norm(&r);
        if nr > rel_tol * nv {
            basis.push(scaled(&r, T::one() / nr));
        }
    }
    basis
}

/// `v - Q Qᵀ v` for an orthonormal `basis` Q, computed with two passes.
pub fn residual<T: Scalar>(v: &[T], basis: &[Vec<T>]) -> Vec<T> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &r);
            axpy(-c, q, &mut r);
        }
    }
    r
}

/// Largest eigenvalue of `diag(values) - z zᵀ`, where `values` are sorted in
/// descending order.
///
/// Solved on the secular equation `1 = Σ z_i² / (λ_i - μ)` in the interlacing
/// bracket `[max(λ₂, λ₁ - z₁²), λ₁]` with safeguarded Newton steps.
pub fn downdated_top_eigenvalue<T: Scalar>(values: &[T], z: &[T]) -> T {
    let n = values.len();
    debug_assert_eq!(n, z.len());
    if n == 0 {
        return T::zero();
    }
    let l1 = values[0];
    let z1sq = z[0] * z[0];
    if n == 1 {
        return l1 - z1sq;
    }
    if z1sq == T::zero() {
        return l1;
    }
    let l2 = values[1];
    let scale = l1.abs().max(l2.abs()).max(T::min_positive_value());
    let eps = T::epsilon();
    if l1 - l2 <= eps * scale * T::lit(4.0) {
        return l1;
    }
    let mut lo = l2.max(l1 - z1sq);
    let mut hi = l1;
    let secular = |mu: T| -> Option<(T, T)> {
        let mut f = T::one();
        let mut df = T::zero();
        for (&l, &zi) in values.iter().zip(z) {
            let zsq = zi * zi;
            if zsq == T::zero() {
                continue;
            }
            let d = l - mu;
            if d == T::zero() {
                return None;
            }
            f = f - zsq / d;
            df = df - zsq / (d * d);
        }
        Some((f, df))
    };
    // root lies at or above lo
    match secular(lo) {
        Some((f, _)) if f <= T::zero() => return lo,
        _ => {}
    }
    let mut mu = (lo + hi) / T::lit(2.0);
    for _ in 0..200 {
        let (f, df) = match secular(mu) {
            Some(v) => v,
            None => return mu,
        };
        if f == T::zero() {
            return mu;
        }
        if f > T::zero() {
            lo = mu;
        } else {
            hi = mu;
        }
        if hi - lo <= eps * scale * T::lit(2.0) {
            break;
        }
        let newton = mu - f / df;
        mu = if newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / T::lit(2.0)
        };
        if mu <= lo || mu >= hi {
            break;
        }
    }
    (lo + hi) / T::lit(2.0)
}

/// Largest eigenvalue of the 2x2 compression `diag(a, b) - (p, q)(p, q)ᵀ`.
pub fn downdated_top_eigenvalue_2x2<T: Scalar>(a: T, b: T, p: T, q: T) -> T {
    let d1 = a - p * p;
    let d2 = b - q * q;
    let off = p * q;
    let half_tr = (d1 + d2) / T::lit(2.0);
    let half_gap = (d1 - d2) / T::lit(2.0);
    half_tr + (half_gap * half_gap + off * off).sqrt()
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i + 1) as u128,
            None => return u128::MAX,
        }
    }
    acc
}
