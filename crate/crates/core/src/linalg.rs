//! Minimal dense square matrix used for covariances and information
//! matrices. Parameter dimensions here are tiny (d <= a handful), so a
//! row-major `Vec` is all that is needed.

use std::ops::{Index, IndexMut};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from row-major data. Panics if `data.len() != n * n`.
    pub fn from_row_major(n: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n * n, "row-major data must hold n*n entries");
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// `(M + M^T) / 2`. The result equals its transpose bit-for-bit since
    /// floating point addition is commutative.
    pub fn symmetrized(&self) -> Self {
        let half = T::of(0.5);
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(i, j)] = (self[(i, j)] + self[(j, i)]) * half;
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.n, other.n);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale(&self, c: T) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&v| v * c).collect() }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), T)> + '_ {
        let n = self.n;
        self.data.iter().enumerate().map(move |(k, &v)| ((k / n, k % n), v))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}
