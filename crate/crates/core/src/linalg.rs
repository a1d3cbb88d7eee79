//! Dense row-major matrices with the few factorizations the crate needs.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
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

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(mut self, c: f64) -> Matrix {
        self.data.iter_mut().for_each(|x| *x *= c);
        self
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let row = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower Cholesky factor `A = L Lᵀ` of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn new(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::invalid("Cholesky of a non-square matrix"));
        }
        let n = a.rows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite);
            }
            let d = math::sqrt(d);
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Cholesky { l })
    }

    /// Adds `1e-12 · max diag` to the diagonal up to three times before giving up.
    /// The zero matrix factors as itself.
    pub fn with_jitter(a: &Matrix) -> Result<Self> {
        if let Ok(c) = Self::new(a) {
            return Ok(c);
        }
        if a.is_square() && a.max_abs() == 0.0 {
            return Ok(Cholesky { l: a.clone() });
        }
        let scale = a.diagonal().iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let step = 1e-12 * if scale > 0.0 { scale } else { 1.0 };
        let mut jittered = a.clone();
        for _ in 0..3 {
            for i in 0..a.rows() {
                jittered[(i, i)] += step;
            }
            if let Ok(c) = Self::new(&jittered) {
                return Ok(c);
            }
        }
        Err(Error::NotPsd)
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.l.diagonal().iter().map(|&d| math::ln(d)).sum::<f64>()
    }

    /// Solves `L z = y`.
    pub fn forward_solve(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(y.len(), n);
        let mut z = y.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            let s: f64 = row[..i].iter().zip(&z[..i]).map(|(a, b)| a * b).sum();
            z[i] = (z[i] - s) / row[i];
        }
        z
    }

    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x = self.forward_solve(y);
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// `yᵀ A⁻¹ y = ‖L⁻¹ y‖²`.
    pub fn quad_form(&self, y: &[f64]) -> f64 {
        self.forward_solve(y).iter().map(|z| z * z).sum()
    }

    /// `L z`, mapping standard normals to draws with covariance `A`.
    pub fn lower_mul(&self, z: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(z.len(), n);
        (0..n)
            .map(|i| self.l.row(i)[..=i].iter().zip(z).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Sign and log-magnitude of a determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub sign: f64,
    pub log_abs: f64,
}

impl LogDet {
    pub fn value(&self) -> f64 {
        self.sign * math::exp(self.log_abs)
    }
}

/// Log-determinant via LU with partial pivoting. Returns `None` when a pivot
/// falls below `n·ε·max|A|`, i.e. the matrix is singular to working precision.
pub fn lu_log_det(a: &Matrix) -> Option<LogDet> {
    assert!(a.is_square());
    let n = a.rows();
    let threshold = n as f64 * f64::EPSILON * a.max_abs();
    let mut m = a.clone();
    let mut sign = 1.0;
    let mut log_abs = 0.0;
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, m[(i, k)].abs()))
            .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        if pmax <= threshold || !pmax.is_finite() {
            return None;
        }
        if p != k {
            for j in 0..n {
                m.data.swap(k * n + j, p * n + j);
            }
            sign = -sign;
        }
        let pivot = m[(k, k)];
        if pivot < 0.0 {
            sign = -sign;
        }
        log_abs += math::ln(pivot.abs());
        for i in k + 1..n {
            let factor = m[(i, k)] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let v = m[(k, j)];
                m[(i, j)] -= factor * v;
            }
        }
    }
    Some(LogDet { sign, log_abs })
}

/// Determinant of a small `k×k` row-major matrix, destroying the buffer.
pub(crate) fn small_det(buf: &mut [f64], k: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..k {
        let mut p = c;
        for r in c + 1..k {
            if buf[r * k + c].abs() > buf[p * k + c].abs() {
                p = r;
            }
        }
        let pivot = buf[p * k + c];
        if pivot == 0.0 {
            return 0.0;
        }
        if p != c {
            for j in 0..k {
                buf.swap(c * k + j, p * k + j);
            }
            det = -det;
        }
        det *= pivot;
        for r in c + 1..k {
            let f = buf[r * k + c] / pivot;
            for j in c + 1..k {
                buf[r * k + j] -= f * buf[c * k + j];
            }
        }
    }
    det
}
