//! Undersampled 2-D Fourier operator `A = P F`.
//!
//! `F` is the unitary DFT (scaled by `1 / sqrt(rows cols)`), `P` keeps the
//! frequencies selected by a [`SamplingMask`]. Measurements are interleaved
//! `(re, im)` pairs in ascending unshifted frequency order, so `A` is a real
//! linear map and its adjoint is `Re(F^H P^T y)`.

use std::sync::Arc;

use curvemg_core::mask::SamplingMask;
use curvemg_core::operator::LinearOperator;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

pub struct MaskedFourier {
    rows: usize,
    cols: usize,
    sampled: Vec<usize>,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for MaskedFourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MaskedFourier")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("sampled", &self.sampled.len())
            .finish()
    }
}

impl MaskedFourier {
    pub fn new(mask: &SamplingMask) -> Self {
        let (rows, cols) = mask.dims();
        let mut planner = FftPlanner::new();
        Self {
            rows,
            cols,
            sampled: mask.sampled_frequencies(),
            row_fwd: planner.plan_fft(cols, FftDirection::Forward),
            row_inv: planner.plan_fft(cols, FftDirection::Inverse),
            col_fwd: planner.plan_fft(rows, FftDirection::Forward),
            col_inv: planner.plan_fft(rows, FftDirection::Inverse),
        }
    }

    /// Number of sampled frequencies (half the measurement length).
    pub fn sampled_count(&self) -> usize {
        self.sampled.len()
    }

    /// Unshifted row-major indices of the sampled frequencies.
    pub fn sampled_frequencies(&self) -> &[usize] {
        &self.sampled
    }

    // In-place unitary 2-D transform of a row-major buffer.
    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let (row_plan, col_plan) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        row_plan.process(buf);
        let mut column = vec![Complex64::new(0.0, 0.0); self.rows];
        for c in 0..self.cols {
            for r in 0..self.rows {
                column[r] = buf[r * self.cols + c];
            }
            col_plan.process(&mut column);
            for r in 0..self.rows {
                buf[r * self.cols + c] = column[r];
            }
        }
        let scale = 1.0 / ((self.rows * self.cols) as f64).sqrt();
        buf.iter_mut().for_each(|v| *v *= scale);
    }
}

impl LinearOperator for MaskedFourier {
    fn image_dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn measurement_len(&self) -> usize {
        2 * self.sampled.len()
    }

    fn forward(&self, x: &[f64], y: &mut [f64]) {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, false);
        for (k, &i) in self.sampled.iter().enumerate() {
            y[2 * k] = buf[i].re;
            y[2 * k + 1] = buf[i].im;
        }
    }

    fn adjoint(&self, y: &[f64], x: &mut [f64]) {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.rows * self.cols];
        for (k, &i) in self.sampled.iter().enumerate() {
            buf[i] = Complex64::new(y[2 * k], y[2 * k + 1]);
        }
        self.transform(&mut buf, true);
        for (v, b) in x.iter_mut().zip(&buf) {
            *v = b.re;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use curvemg_core::image::gaussian_samples;
    use curvemg_core::mask::MaskKind;
    use curvemg_core::operator::{adjoint_mismatch, norm};

    #[test]
    fn full_mask_preserves_norm() {
        let op = MaskedFourier::new(&SamplingMask::full(12, 10).unwrap());
        let x = gaussian_samples(120, 1.0, 3);
        let y = op.apply(&x);
        assert!((norm(&y) - norm(&x)).abs() <= 1e-12 * norm(&x));
        let back = op.apply_adjoint(&y);
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dc_term_is_scaled_sum() {
        let mut data = vec![false; 16];
        data[2 * 4 + 2] = true;
        let op = MaskedFourier::new(&SamplingMask::new(MaskKind::Cartesian, 4, 4, data).unwrap());
        let y = op.apply(&[1.0; 16]);
        assert_eq!(y.len(), 2);
        assert!((y[0] - 4.0).abs() < 1e-12 && y[1].abs() < 1e-12);
    }

    #[test]
    fn radial_adjoint() {
        let op = MaskedFourier::new(&SamplingMask::radial(16, 20, 0.3).unwrap());
        let x = gaussian_samples(op.image_len(), 1.0, 1);
        let y = gaussian_samples(op.measurement_len(), 1.0, 2);
        assert!(adjoint_mismatch(&op, &x, &y) <= 1e-12);
    }
}
