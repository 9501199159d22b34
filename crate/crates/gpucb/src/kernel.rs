//! Stationary covariance functions and Gram-matrix construction.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Diagonal jitter added before any Cholesky of a prior Gram matrix.
/// Duplicate grid points arise in synthetic-function generation, so prior
/// Gram matrices are routinely singular.
pub const GRAM_JITTER: f64 = 1e-10;

/// Supported stationary kernel families.
///
/// Both are variance-normalized: `k(x, x) = output_scale` everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    SquaredExponential,
    Matern52,
}

/// A stationary kernel with per-dimension (ARD) length scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    family: KernelFamily,
    length_scales: Vec<f64>,
    output_scale: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, length_scales: Vec<f64>, output_scale: f64) -> Result<Self> {
        if length_scales.is_empty() {
            return Err(Error::input("kernel needs at least one length scale"));
        }
        if length_scales.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::input("all kernel length scales must be positive and finite"));
        }
        if !(output_scale > 0.0) || !output_scale.is_finite() {
            return Err(Error::input("kernel output scale must be positive and finite"));
        }
        Ok(KernelSpec {
            family,
            length_scales,
            output_scale,
        })
    }

    /// Squared-exponential kernel with unit output scale.
    pub fn squared_exponential(length_scales: Vec<f64>) -> Result<Self> {
        Self::new(KernelFamily::SquaredExponential, length_scales, 1.0)
    }

    /// Isotropic squared-exponential kernel with unit output scale.
    pub fn squared_exponential_iso(length_scale: f64, dim: usize) -> Result<Self> {
        Self::squared_exponential(vec![length_scale; dim])
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn length_scales(&self) -> &[f64] {
        &self.length_scales
    }

    pub fn output_scale(&self) -> f64 {
        self.output_scale
    }

    pub fn dim(&self) -> usize {
        self.length_scales.len()
    }

    /// Same kernel with replaced length scales.
    pub fn with_length_scales(&self, length_scales: Vec<f64>) -> Result<Self> {
        Self::new(self.family, length_scales, self.output_scale)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::input(format!(
                "point dimension {} does not match kernel dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Squared length-scale-weighted distance sum((x_j - y_j) / l_j)^2.
    fn scaled_sq_dist(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .zip(&self.length_scales)
            .map(|((a, b), l)| {
                let d = (a - b) / l;
                d * d
            })
            .sum()
    }

    /// Evaluates `k(x, y)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let r2 = self.scaled_sq_dist(x, y);
        let v = match self.family {
            KernelFamily::SquaredExponential => (-0.5 * r2).exp(),
            KernelFamily::Matern52 => {
                let r = r2.sqrt();
                let s5r = 5.0_f64.sqrt() * r;
                (1.0 + s5r + 5.0 * r2 / 3.0) * (-s5r).exp()
            }
        };
        Ok(self.output_scale * v)
    }

    /// Gram matrix of a point set. Empty input gives a 0x0 matrix.
    pub fn gram(&self, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        for p in points {
            self.check_dim(p)?;
        }
        let n = points.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = self.output_scale;
            for j in 0..i {
                let v = self.eval(&points[i], &points[j])?;
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        Ok(k)
    }

    /// Cross-covariance matrix between two point sets (rows x columns).
    pub fn cross_gram(&self, rows: &[Vec<f64>], cols: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let mut k = DMatrix::zeros(rows.len(), cols.len());
        for (i, p) in rows.iter().enumerate() {
            for (j, q) in cols.iter().enumerate() {
                k[(i, j)] = self.eval(p, q)?;
            }
        }
        Ok(k)
    }
}
