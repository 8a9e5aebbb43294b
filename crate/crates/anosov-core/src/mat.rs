//! Small dense matrices over `f64` and `Complex<f64>`.
//!
//! Everything here targets desk-scale dimensions (d <= 8); algorithms are
//! plain Gaussian elimination and modified Gram-Schmidt with partial
//! pivoting.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::math;

/// Row-major rectangular matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            a: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut a = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            a.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, a }
    }

    /// Build a matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vec<f64>]) -> Self {
        let c = cols.len();
        let r = cols[0].len();
        let mut m = Mat::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), r);
            for i in 0..r {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut s = 0.0;
            for j in 0..self.cols {
                s += self[(i, j)] * v[j];
            }
            out[i] = s;
        }
        out
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> Mat {
        let mut out = self.clone();
        for x in out.a.iter_mut() {
            *x *= c;
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.a.iter_mut().zip(other.a.iter()) {
            *x += *y;
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.a.iter_mut().zip(other.a.iter()) {
            *x -= *y;
        }
        out
    }

    /// Max absolute entry.
    pub fn max_norm(&self) -> f64 {
        self.a.iter().fold(0.0, |m, &x| m.max(math::abs(x)))
    }

    /// Solve `A x = b` by Gaussian elimination with partial pivoting.
    /// Returns `None` for (numerically) singular systems.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = vec![0.0; n * (n + 1)];
        for i in 0..n {
            for j in 0..n {
                aug[i * (n + 1) + j] = self[(i, j)];
            }
            aug[i * (n + 1) + n] = b[i];
        }
        for k in 0..n {
            let mut piv = k;
            for i in (k + 1)..n {
                if math::abs(aug[i * (n + 1) + k]) > math::abs(aug[piv * (n + 1) + k]) {
                    piv = i;
                }
            }
            if math::abs(aug[piv * (n + 1) + k]) < 1e-300 {
                return None;
            }
            if piv != k {
                for j in 0..=n {
                    aug.swap(k * (n + 1) + j, piv * (n + 1) + j);
                }
            }
            let p = aug[k * (n + 1) + k];
            for i in (k + 1)..n {
                let f = aug[i * (n + 1) + k] / p;
                if f == 0.0 {
                    continue;
                }
                for j in k..=n {
                    aug[i * (n + 1) + j] -= f * aug[k * (n + 1) + j];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = aug[i * (n + 1) + n];
            for j in (i + 1)..n {
                s -= aug[i * (n + 1) + j] * x[j];
            }
            x[i] = s / aug[i * (n + 1) + i];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            cols.push(self.solve(&e)?);
        }
        Some(Mat::from_cols(&cols))
    }

    /// Orthonormalize the columns in place (modified Gram-Schmidt).
    /// Returns the diagonal of R (column norms after projection).
    pub fn qr_in_place(&mut self) -> Vec<f64> {
        let mut diag = vec![0.0; self.cols];
        for j in 0..self.cols {
            for i in 0..j {
                let qi = self.col(i);
                let d = dot(&qi, &self.col(j));
                for r in 0..self.rows {
                    self[(r, j)] -= d * qi[r];
                }
            }
            let nrm = norm(&self.col(j));
            diag[j] = nrm;
            if nrm > 0.0 {
                for r in 0..self.rows {
                    self[(r, j)] /= nrm;
                }
            }
        }
        diag
    }

    /// One-dimensional null space of a rectangular system `A x = 0`,
    /// returned as any nonzero kernel vector, or `None` if the numerical
    /// rank is full.
    pub fn kernel_vector(&self, tol: f64) -> Option<Vec<f64>> {
        let ns = self.null_space(tol);
        ns.into_iter().next()
    }

    /// Basis of the (numerical) null space via row reduction.
    pub fn null_space(&self, tol: f64) -> Vec<Vec<f64>> {
        let m = self.rows;
        let n = self.cols;
        let mut a = self.a.clone();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut row = 0;
        for col in 0..n {
            if row >= m {
                break;
            }
            let mut piv = row;
            for i in (row + 1)..m {
                if math::abs(a[i * n + col]) > math::abs(a[piv * n + col]) {
                    piv = i;
                }
            }
            if math::abs(a[piv * n + col]) <= tol {
                continue;
            }
            if piv != row {
                for j in 0..n {
                    a.swap(row * n + j, piv * n + j);
                }
            }
            let p = a[row * n + col];
            for j in 0..n {
                a[row * n + j] /= p;
            }
            for i in 0..m {
                if i == row {
                    continue;
                }
                let f = a[i * n + col];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[i * n + j] -= f * a[row * n + j];
                }
            }
            pivots.push((row, col));
            row += 1;
        }
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let mut basis = Vec::new();
        for free in 0..n {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = vec![0.0; n];
            v[free] = 1.0;
            for &(r, c) in &pivots {
                v[c] = -a[r * n + free];
            }
            let nn = norm(&v);
            for x in v.iter_mut() {
                *x /= nn;
            }
            basis.push(v);
        }
        basis
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.a[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.a[i * self.cols + j]
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    math::sqrt(dot(x, x))
}

pub fn normalize(x: &mut [f64]) {
    let n = norm(x);
    if n > 0.0 {
        for v in x.iter_mut() {
            *v /= n;
        }
    }
}

/// Fix the sign so the first coordinate with |x_i| > 1e-8 is positive.
pub fn orient(x: &mut [f64]) {
    for &v in x.iter() {
        if math::abs(v) > 1e-8 {
            if v < 0.0 {
                for w in x.iter_mut() {
                    *w = -*w;
                }
            }
            return;
        }
    }
}

/// Null-space basis of a complex matrix (row reduction with threshold).
pub fn complex_null_space(rows: usize, cols: usize, a0: &[Complex64], tol: f64) -> Vec<Vec<Complex64>> {
    let mut a = a0.to_vec();
    let (m, n) = (rows, cols);
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row >= m {
            break;
        }
        let mut piv = row;
        for i in (row + 1)..m {
            if a[i * n + col].norm() > a[piv * n + col].norm() {
                piv = i;
            }
        }
        if a[piv * n + col].norm() <= tol {
            continue;
        }
        if piv != row {
            for j in 0..n {
                a.swap(row * n + j, piv * n + j);
            }
        }
        let p = a[row * n + col];
        for j in 0..n {
            a[row * n + j] /= p;
        }
        for i in 0..m {
            if i == row {
                continue;
            }
            let f = a[i * n + col];
            if f.norm() == 0.0 {
                continue;
            }
            for j in 0..n {
                let sub = f * a[row * n + j];
                a[i * n + j] -= sub;
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut basis = Vec::new();
    for free in 0..n {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[free] = Complex64::new(1.0, 0.0);
        for &(r, c) in &pivots {
            v[c] = -a[r * n + free];
        }
        let nn = math::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        for z in v.iter_mut() {
            *z /= nn;
        }
        basis.push(v);
    }
    basis
}

/// Numerical rank of a complex matrix.
pub fn complex_rank(rows: usize, cols: usize, a: &[Complex64], tol: f64) -> usize {
    let null = complex_null_space(rows, cols, a, tol);
    cols - null.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_inverse() {
        let m = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]);
        let x = m.solve(&[3.0, 2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        let inv = m.inverse().unwrap();
        let id = m.matmul(&inv);
        assert!(id.sub(&Mat::identity(2)).max_norm() < 1e-12);
    }

    #[test]
    fn null_space_of_rank_one() {
        let m = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        let ns = m.null_space(1e-10);
        assert_eq!(ns.len(), 1);
        let v = &ns[0];
        assert!((v[0] + 2.0 * v[1]).abs() < 1e-10);
    }

    #[test]
    fn qr_orthonormal() {
        let mut m = Mat::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        m.qr_in_place();
        let g = m.transpose().matmul(&m);
        assert!(g.sub(&Mat::identity(2)).max_norm() < 1e-12);
    }
}
