//! Small dense complex matrices and a scaling-and-squaring exponential.

use std::ops::{Index, IndexMut};

use num_complex::Complex64 as C64;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::default(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::default() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        assert_eq!(v.len(), n);
        (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .map(|j| (0..n).map(|i| self.data[i * n + j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Matrix exponential by scaling and squaring with a truncated Taylor series.
    ///
    /// The matrix is scaled until its 1-norm is at most 1/2, where 20 Taylor terms
    /// are accurate far below double precision.
    pub fn expm(&self) -> Self {
        let norm = self.norm1();
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let scaled = self.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));
        let mut term = Self::identity(self.dim);
        let mut sum = Self::identity(self.dim);
        for k in 1..=20 {
            term = term.matmul(&scaled).scale(C64::new(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
        }
        for _ in 0..squarings {
            sum = sum.matmul(&sum);
        }
        sum
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_diagonal() {
        let mut m = DenseMatrix::zeros(3);
        m[(0, 0)] = C64::new(0.0, -40.0);
        m[(1, 1)] = C64::new(-2.0, 3.0);
        let e = m.expm();
        assert!((e[(0, 0)] - C64::new(0.0, -40.0).exp()).norm() < 1e-12);
        assert!((e[(1, 1)] - C64::new(-2.0, 3.0).exp()).norm() < 1e-12);
        assert!((e[(2, 2)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(e[(0, 1)], C64::default());
    }

    #[test]
    fn exp_of_rotation_generator() {
        // exp(-i θ σx) = cos θ − i sin θ σx
        let theta = 7.3;
        let mut m = DenseMatrix::zeros(2);
        m[(0, 1)] = C64::new(0.0, -theta);
        m[(1, 0)] = C64::new(0.0, -theta);
        let e = m.expm();
        assert!((e[(0, 0)].re - theta.cos()).abs() < 1e-12);
        assert!((e[(0, 1)].im + theta.sin()).abs() < 1e-12);
        let u = e.matmul(&e.adjoint());
        assert!(u.max_abs_diff(&DenseMatrix::identity(2)) < 1e-12);
    }
}
