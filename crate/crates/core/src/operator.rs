//! Linear forward models `A : R^(rows x cols) -> R^m`.
//!
//! Complex measurements are stored as interleaved `(re, im)` pairs, so every
//! operator is a real linear map and its adjoint is the real transpose.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::math;
use crate::par;

pub trait LinearOperator: Sync {
    /// `(rows, cols)` of the image domain.
    fn image_dims(&self) -> (usize, usize);

    /// Number of real measurement values.
    fn measurement_len(&self) -> usize;

    /// `y = A x` with `x` row-major.
    fn forward(&self, x: &[f64], y: &mut [f64]);

    /// `x = A^T y`.
    fn adjoint(&self, y: &[f64], x: &mut [f64]);

    fn image_len(&self) -> usize {
        let (r, c) = self.image_dims();
        r * c
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.image_len(), "forward input length");
        let mut y = vec![0.0; self.measurement_len()];
        self.forward(x, &mut y);
        y
    }

    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.measurement_len(), "adjoint input length");
        let mut x = vec![0.0; self.image_len()];
        self.adjoint(y, &mut x);
        x
    }

    fn forward_image(&self, img: &Image) -> Result<Vec<f64>> {
        if img.dims() != self.image_dims() {
            return Err(Error::DimensionMismatch {
                expected: self.image_dims(),
                found: img.dims(),
            });
        }
        Ok(self.apply(img.data()))
    }

    fn adjoint_image(&self, y: &[f64], peak: f64) -> Result<Image> {
        if y.len() != self.measurement_len() {
            return Err(Error::DimensionMismatch {
                expected: (self.measurement_len(), 1),
                found: (y.len(), 1),
            });
        }
        let (rows, cols) = self.image_dims();
        Image::new(cols, rows, self.apply_adjoint(y), peak)
    }
}

/// `A = I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityOperator {
    rows: usize,
    cols: usize,
}

impl IdentityOperator {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }
}

impl LinearOperator for IdentityOperator {
    fn image_dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn measurement_len(&self) -> usize {
        self.rows * self.cols
    }

    fn forward(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }

    fn adjoint(&self, y: &[f64], x: &mut [f64]) {
        x.copy_from_slice(y);
    }
}

pub fn norm(v: &[f64]) -> f64 {
    math::sqrt(par::dot(v, v))
}

/// Power-iteration estimate of `||A||^2 = lambda_max(A^T A)` from a constant
/// start vector.
pub fn operator_norm_sq(op: &dyn LinearOperator, iterations: usize) -> Result<f64> {
    let n = op.image_len();
    let mut x = vec![1.0 / math::sqrt(n as f64); n];
    let mut y = vec![0.0; op.measurement_len()];
    let mut lambda = 0.0;
    for _ in 0..iterations.max(1) {
        op.forward(&x, &mut y);
        let mut z = vec![0.0; n];
        op.adjoint(&y, &mut z);
        lambda = norm(&z);
        if lambda == 0.0 {
            return Err(Error::ZeroNorm);
        }
        z.iter_mut().for_each(|v| *v /= lambda);
        x = z;
    }
    Ok(lambda)
}

/// Relative dot-product mismatch `|<Ax, y> - <x, A^T y>| / (||Ax|| ||y||)`.
pub fn adjoint_mismatch(op: &dyn LinearOperator, x: &[f64], y: &[f64]) -> f64 {
    let ax = op.apply(x);
    let aty = op.apply_adjoint(y);
    let lhs = par::dot(&ax, y);
    let rhs = par::dot(x, &aty);
    let scale = norm(&ax) * norm(y);
    if scale == 0.0 {
        (lhs - rhs).abs()
    } else {
        (lhs - rhs).abs() / scale
    }
}
