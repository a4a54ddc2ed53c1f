//! Dense complex linear algebra kernels.
//!
//! Everything in the crate runs on one matrix representation: a row-major
//! `Vec<Complex<f64>>` wrapped in [`CMat`]. Dimensions at desk scale stay
//! below ~10³, so dense storage and O(n³) kernels are the right tradeoff;
//! no sparsity, no blocking.
//!
//! The Hermitian eigensolver is a cyclic complex Jacobi iteration: slower
//! than tridiagonalization but unconditionally stable and accurate to a few
//! ulps, which is what the validation tolerances lean on. Positive
//! semidefiniteness at large dimension is bounded with a shifted Cholesky
//! factorization instead (O(n³/3), no eigenvectors).

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex;

use crate::error::{Error, Result};

/// Double-precision complex scalar used throughout.
pub type C64 = Complex<f64>;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Square matrix with the given real diagonal.
    pub fn diag_real(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = C64::new(d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Max-norm of `A - A†` (0 for an exactly Hermitian matrix).
    pub fn hermiticity_residual(&self) -> f64 {
        let mut r = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                if d > r {
                    r = d;
                }
            }
        }
        r
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, z| {
            let n = z.norm();
            if n > m {
                n
            } else {
                m
            }
        })
    }

    /// Largest off-diagonal entry magnitude.
    pub fn off_diagonal_max(&self) -> f64 {
        let mut r = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    let n = self.get(i, j).norm();
                    if n > r {
                        r = n;
                    }
                }
            }
        }
        r
    }

    /// Max-norm of the difference `A - B`.
    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).fold(0.0f64, |m, (a, b)| {
            let n = (a - b).norm();
            if n > m {
                n
            } else {
                m
            }
        })
    }

    /// Squared Frobenius norm `Σ |a_ij|²`. For a Hermitian matrix this equals
    /// `Tr[A²]`.
    pub fn frobenius_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, w: C64) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * w).collect(),
        }
    }

    pub fn add(&self, other: &CMat) -> CMat {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Matrix product, accumulated in i-k-j order so the inner loop walks
    /// contiguous rows of both operands.
    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow_base = i * other.cols;
            for (k, &aik) in arow.iter().enumerate() {
                if aik == C64::ZERO {
                    continue;
                }
                let brow = other.row(k);
                let dst = &mut out.data[orow_base..orow_base + other.cols];
                for (d, &b) in dst.iter_mut().zip(brow) {
                    *d += aik * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    /// Kronecker product with the first factor varying slowest (row-major in
    /// the first factor): index `(i1·r2 + i2, j1·c2 + j2)`.
    pub fn kron(&self, other: &CMat) -> CMat {
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        let mut out = CMat::zeros(r1 * r2, c1 * c2);
        for i1 in 0..r1 {
            for j1 in 0..c1 {
                let a = self.get(i1, j1);
                if a == C64::ZERO {
                    continue;
                }
                for i2 in 0..r2 {
                    let dst_row = (i1 * r2 + i2) * out.cols + j1 * c2;
                    let src = other.row(i2);
                    let dst = &mut out.data[dst_row..dst_row + c2];
                    for (d, &b) in dst.iter_mut().zip(src) {
                        *d += a * b;
                    }
                }
            }
        }
        out
    }

    /// Rank-1 update `A += w · v v†`.
    pub fn outer_accumulate(&mut self, w: f64, v: &[C64]) {
        assert_eq!(self.rows, v.len());
        assert_eq!(self.cols, v.len());
        for (i, &vi) in v.iter().enumerate() {
            let a = vi * w;
            if a == C64::ZERO {
                continue;
            }
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            for (d, &vj) in row.iter_mut().zip(v) {
                *d += a * vj.conj();
            }
        }
    }

    /// `max |[A, B]_ij|` for diagonal `A` given by `diag`: the commutator of a
    /// diagonal matrix with anything is `(d_i - d_j)·B_ij`, so no product is
    /// formed.
    pub fn commutator_max_with_diag(diag: &[f64], b: &CMat) -> f64 {
        assert_eq!(diag.len(), b.rows);
        let mut r = 0.0f64;
        for i in 0..b.rows {
            for j in 0..b.cols {
                let n = libm::fabs(diag[i] - diag[j]) * b.get(i, j).norm();
                if n > r {
                    r = n;
                }
            }
        }
        r
    }
}

/// `Σ |v_i|²`.
pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `⟨a|b⟩ = Σ conj(a_i)·b_i`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Kronecker product of vectors, first factor slowest: index `i1·n2 + i2`.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// Scale `v` to unit norm. Errors if the norm is numerically zero.
pub fn normalized(v: &[C64]) -> Result<Vec<C64>> {
    let n2 = norm_sqr(v);
    if n2 < 1e-300 {
        return Err(Error::NotNormalized {
            norm_sqr: n2,
            tol: 0.0,
        });
    }
    let inv = 1.0 / libm::sqrt(n2);
    Ok(v.iter().map(|z| z * inv).collect())
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// Returns eigenvalues in ascending order and the unitary whose columns are
/// the matching eigenvectors. The caller is responsible for Hermiticity; the
/// iteration only reads the upper triangle consistently with it.
pub fn eigh(a: &CMat) -> (Vec<f64>, CMat) {
    assert_eq!(a.rows(), a.cols(), "eigh needs a square matrix");
    let n = a.rows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let mut m = a.clone();
    let mut v = CMat::identity(n);
    let scale = m.max_abs();
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }
    let stop = scale * 1e-15;

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let z = m.get(p, q);
                let az = z.norm();
                if az > off {
                    off = az;
                }
                if az <= stop {
                    continue;
                }
                let alpha = m.get(p, p).re;
                let beta = m.get(q, q).re;
                let tau = (beta - alpha) / (2.0 * az);
                // Smaller-magnitude root of t² - 2τt - 1 = 0.
                let t = if tau >= 0.0 {
                    -1.0 / (tau + libm::sqrt(1.0 + tau * tau))
                } else {
                    1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                let u = z / az; // unit phase of the annihilated entry

                rotate_cols(&mut m, p, q, c, s, u);
                rotate_rows(&mut m, p, q, c, s, u);
                rotate_cols(&mut v, p, q, c, s, u);

                // Pin the algebraically exact zeros and real diagonal.
                m.set(p, q, C64::ZERO);
                m.set(q, p, C64::ZERO);
                let dp = m.get(p, p);
                m.set(p, p, C64::new(dp.re, 0.0));
                let dq = m.get(q, q);
                m.set(q, q, C64::new(dq.re, 0.0));
            }
        }
        if off <= stop {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let eigs: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
    order.sort_by(|&i, &j| {
        eigs[i]
            .partial_cmp(&eigs[j])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let sorted_eigs: Vec<f64> = order.iter().map(|&i| eigs[i]).collect();
    let sorted_v = CMat::from_fn(n, n, |i, j| v.get(i, order[j]));
    (sorted_eigs, sorted_v)
}

/// `A ← A·G` for the Jacobi unitary `G` acting on columns `p, q`:
/// `col_p' = c·col_p + s·ū·col_q`, `col_q' = -s·u·col_p + c·col_q`.
fn rotate_cols(m: &mut CMat, p: usize, q: usize, c: f64, s: f64, u: C64) {
    let n = m.rows();
    let su = u * s;
    for i in 0..n {
        let ap = m.get(i, p);
        let aq = m.get(i, q);
        m.set(i, p, ap * c + aq * su.conj());
        m.set(i, q, aq * c - ap * su);
    }
}

/// `A ← G†·A`: `row_p' = c·row_p + s·u·row_q`, `row_q' = -s·ū·row_p + c·row_q`.
fn rotate_rows(m: &mut CMat, p: usize, q: usize, c: f64, s: f64, u: C64) {
    let cols = m.cols();
    let su = u * s;
    for j in 0..cols {
        let ap = m.get(p, j);
        let aq = m.get(q, j);
        m.set(p, j, ap * c + aq * su);
        m.set(q, j, aq * c - ap * su.conj());
    }
}

/// Bound check `min eig(A) ≥ -tol`, up to O(n·ε·‖A‖) slack, via Cholesky of
/// the shifted matrix `A + tol·I`. Cheaper than an eigensolve and sufficient
/// for validating construction-time positivity at large dimension.
pub fn psd_within(a: &CMat, tol: f64) -> bool {
    let n = a.rows();
    if n != a.cols() {
        return false;
    }
    let slack = 16.0 * n as f64 * f64::EPSILON * a.max_abs().max(1e-300);
    let shift = tol + slack;
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j).re + shift;
        for k in 0..j {
            d -= l.get(j, k).norm_sqr();
        }
        if d <= 0.0 {
            return false;
        }
        let root = libm::sqrt(d);
        l.set(j, j, C64::new(root, 0.0));
        for i in (j + 1)..n {
            let mut v = a.get(i, j);
            for k in 0..j {
                v -= l.get(i, k) * l.get(j, k).conj();
            }
            l.set(i, j, v / root);
        }
    }
    true
}
