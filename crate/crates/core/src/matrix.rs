//! Small dense square matrices.
//!
//! Dimensions here are tiny (the internal degree of freedom `d` is rarely
//! above 4), so a flat row-major buffer with hand-written products beats
//! pulling in a linear-algebra stack, and keeps the on-disk row-major layout
//! identical to the in-memory one.

use crate::error::{Error, Result};

/// Row-major `d × d` matrix of reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    d: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(d: usize) -> Self {
        Matrix {
            d,
            data: vec![0.0; d * d],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Matrix::zeros(d);
        for i in 0..d {
            m.data[i * d + i] = 1.0;
        }
        m
    }

    /// Builds from a row-major entry list; the length must be `d²`.
    pub fn from_rows(d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("matrix dimension must be >= 1"));
        }
        if data.len() != d * d {
            return Err(Error::domain(format!(
                "expected {} entries for a {d}x{d} matrix, got {}",
                d * d,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("matrix entries must be finite"));
        }
        Ok(Matrix { d, data })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.d + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.d + col] = value;
    }

    /// `self · rhs`. Panics on dimension mismatch (internal invariant).
    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.d, rhs.d, "matrix dimension mismatch");
        let d = self.d;
        let mut out = Matrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * rhs.data[k * d + j];
                }
            }
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        Matrix {
            d: self.d,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Matrix, c: f64) {
        assert_eq!(self.d, other.d, "matrix dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn transpose(&self) -> Matrix {
        let d = self.d;
        let mut out = Matrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j];
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.d);
        let d = self.d;
        (0..d)
            .map(|i| (0..d).map(|j| self.data[i * d + j] * v[j]).sum())
            .collect()
    }

    /// Operator norm induced by the l1 vector norm: max column abs-sum.
    pub fn l1_operator_norm(&self) -> f64 {
        let d = self.d;
        (0..d)
            .map(|j| (0..d).map(|i| self.data[i * d + j].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Quadratic form (χ, M χ) with χ the all-ones vector: the entry sum.
    pub fn quadform_ones(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_entrywise_positive(&self) -> bool {
        self.data.iter().all(|&x| x > 0.0)
    }

    pub fn is_entrywise_nonnegative(&self) -> bool {
        self.data.iter().all(|&x| x >= 0.0)
    }

    /// Splits into a unit-l1-norm matrix plus a separate log scale, so that
    /// `self = exp(log_scale) · unit`. The zero matrix maps to scale -inf.
    pub fn l1_normalized(&self) -> (Matrix, f64) {
        let norm = self.l1_operator_norm();
        if norm == 0.0 {
            (self.clone(), f64::NEG_INFINITY)
        } else {
            (self.scaled(1.0 / norm), norm.ln())
        }
    }
}
