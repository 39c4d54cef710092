//! Small dense matrices. Phase spaces here are a handful of dimensions, so
//! everything is row-major `Vec<f64>` with naive loops.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    /// The canonical structure matrix `J = [[0, I], [-I, 0]]` of size 2d.
    pub fn symplectic_j(d: usize) -> Self {
        let mut j = Matrix::zeros(2 * d, 2 * d);
        for i in 0..d {
            j[(i, d + i)] = 1.0;
            j[(d + i, i)] = -1.0;
        }
        j
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec shape");
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add shape");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "diff shape");
        self.data.iter().zip(&other.data).map(|(a, b)| libm::fabs(a - b)).fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols && self.max_abs_diff(&self.transpose()) <= tol
    }

    fn norm_1(&self) -> f64 {
        (0..self.cols).map(|j| (0..self.rows).map(|i| libm::fabs(self[(i, j)])).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Residual `‖DᵀJD − J‖∞` (max-abs entry) of a square 2d×2d matrix.
    pub fn symplectic_residual(&self) -> f64 {
        assert!(self.rows == self.cols && self.rows % 2 == 0, "symplectic residual needs 2d×2d");
        let j = Matrix::symplectic_j(self.rows / 2);
        self.transpose().matmul(&j).matmul(self).max_abs_diff(&j)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
///
/// The argument is scaled so that its 1-norm is at most 1/2; the series is then
/// summed until terms drop below machine precision relative to the partial sum.
pub fn expm(a: &Matrix) -> Matrix {
    assert_eq!(a.rows, a.cols, "expm needs a square matrix");
    let n = a.rows;
    let norm = a.norm_1();
    let mut squarings = 0i32;
    if norm > 0.5 {
        squarings = libm::ceil(libm::log2(norm / 0.5)) as i32;
    }
    let scaled = a.scale(libm::ldexp(1.0, -squarings));
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=30 {
        term = term.matmul(&scaled).scale(1.0 / k as f64);
        sum = sum.add(&term);
        let t = term.data.iter().map(|v| libm::fabs(*v)).fold(0.0, f64::max);
        if t <= f64::EPSILON * 1e-3 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_is_skew_and_squares_to_minus_identity() {
        let j = Matrix::symplectic_j(2);
        assert_eq!(j.transpose(), j.scale(-1.0));
        assert_eq!(j.matmul(&j), Matrix::identity(4).scale(-1.0));
        assert_eq!(Matrix::identity(4).symplectic_residual(), 0.0);
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp(θ [[0,-1],[1,0]]) is a rotation.
        let theta = 2.7;
        let g = Matrix::from_rows(2, 2, vec![0.0, -theta, theta, 0.0]);
        let r = expm(&g);
        let (c, s) = (libm::cos(theta), libm::sin(theta));
        let expected = Matrix::from_rows(2, 2, vec![c, -s, s, c]);
        assert!(r.max_abs_diff(&expected) < 1e-14, "{r:?}");
    }

    #[test]
    fn expm_of_zero_and_diagonal() {
        assert_eq!(expm(&Matrix::zeros(3, 3)), Matrix::identity(3));
        let d = Matrix::from_rows(2, 2, vec![1.5, 0.0, 0.0, -3.0]);
        let e = expm(&d);
        assert!((e[(0, 0)] - libm::exp(1.5)).abs() < 1e-13 * libm::exp(1.5));
        assert!((e[(1, 1)] - libm::exp(-3.0)).abs() < 1e-15);
        assert_eq!(e[(0, 1)], 0.0);
    }
}
