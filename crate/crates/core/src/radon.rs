//! Parallel-beam Radon transform, discretized with Joseph's method.
//!
//! Pixel `(r, c)` sits at `x = c - (cols - 1) / 2`, `y = (rows - 1) / 2 - r`.
//! Detector bin `d` of angle `theta` integrates along the line
//! `x cos(theta) + y sin(theta) = t_d`, `t_d = (d - (D - 1) / 2) * spacing`.
//! The line is sampled once per image column (or row, whichever the ray
//! crosses faster) with linear interpolation between the two nearest pixels,
//! weighted by the path length per step, in units of `pixel_size`. The weights are stored as a sparse
//! matrix together with its transpose, so the adjoint is exact.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::operator::LinearOperator;
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct RadonGeometry {
    pub rows: usize,
    pub cols: usize,
    /// Projection angles in `[0, pi)`, strictly increasing.
    pub angles: Vec<f64>,
    pub detector_count: usize,
    /// Detector bin width in pixels.
    pub detector_spacing: f64,
    /// Edge length of one pixel; path lengths are measured in this unit.
    pub pixel_size: f64,
}

impl RadonGeometry {
    /// `n_angles` uniform angles `k pi / n_angles`, enough unit-spaced
    /// detectors to cover the image diagonal, and a unit-width field of view
    /// (`pixel_size = 1 / max(rows, cols)`).
    pub fn parallel_beam(rows: usize, cols: usize, n_angles: usize) -> Result<Self> {
        if n_angles == 0 {
            return Err(Error::InvalidConfig("at least one projection angle is required".into()));
        }
        let angles = (0..n_angles)
            .map(|k| k as f64 * core::f64::consts::PI / n_angles as f64)
            .collect();
        let diag = math::sqrt(2.0) * rows.max(cols) as f64;
        let geometry = Self {
            rows,
            cols,
            angles,
            detector_count: math::ceil(diag) as usize + 1,
            detector_spacing: 1.0,
            pixel_size: 1.0 / rows.max(cols).max(1) as f64,
        };
        geometry.validate()?;
        Ok(geometry)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidImage(alloc::format!(
                "empty domain {}x{}",
                self.rows,
                self.cols
            )));
        }
        if self.angles.is_empty() || self.detector_count == 0 {
            return Err(Error::InvalidConfig("empty projection geometry".into()));
        }
        let pi = core::f64::consts::PI;
        let in_range = self.angles.iter().all(|a| (0.0..pi).contains(a));
        let increasing = self.angles.windows(2).all(|w| w[0] < w[1]);
        if !in_range || !increasing {
            return Err(Error::InvalidConfig(
                "angles must increase strictly within [0, pi)".into(),
            ));
        }
        if !(self.detector_spacing > 0.0 && self.detector_spacing.is_finite()) {
            return Err(Error::InvalidConfig("detector spacing must be positive".into()));
        }
        if !(self.pixel_size > 0.0 && self.pixel_size.is_finite()) {
            return Err(Error::InvalidConfig("pixel size must be positive".into()));
        }
        Ok(())
    }

    /// Sinogram dims `(n_angles, detector_count)`.
    pub fn sinogram_dims(&self) -> (usize, usize) {
        (self.angles.len(), self.detector_count)
    }

    pub fn detector_position(&self, d: usize) -> f64 {
        (d as f64 - (self.detector_count as f64 - 1.0) / 2.0) * self.detector_spacing
    }
}

#[derive(Debug, Clone)]
struct Csr {
    offsets: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl Csr {
    fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    fn mul(&self, x: &[f64], y: &mut [f64]) {
        const CHUNK: usize = 256;
        par::for_each_chunk_mut(y, CHUNK, |k, out| {
            for (j, v) in out.iter_mut().enumerate() {
                let (idx, val) = self.row(k * CHUNK + j);
                let mut acc = 0.0;
                for (&i, &w) in idx.iter().zip(val) {
                    acc += w * x[i as usize];
                }
                *v = acc;
            }
        });
    }

    fn transpose(&self, cols: usize) -> Csr {
        let mut counts = vec![0usize; cols + 1];
        for &i in &self.indices {
            counts[i as usize + 1] += 1;
        }
        for k in 0..cols {
            counts[k + 1] += counts[k];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let mut indices = vec![0u32; self.indices.len()];
        let mut values = vec![0.0; self.values.len()];
        for r in 0..self.rows() {
            let (idx, val) = self.row(r);
            for (&c, &w) in idx.iter().zip(val) {
                let slot = fill[c as usize];
                indices[slot] = r as u32;
                values[slot] = w;
                fill[c as usize] += 1;
            }
        }
        Csr {
            offsets,
            indices,
            values,
        }
    }
}

/// The Radon transform as a [`LinearOperator`]; measurements are the
/// sinogram in row-major `(angle, detector)` order.
#[derive(Debug, Clone)]
pub struct RadonOperator {
    geometry: RadonGeometry,
    matrix: Csr,
    transpose: Csr,
}

// Joseph weights of one ray, appended as (pixel, weight) pairs.
fn trace_ray(g: &RadonGeometry, theta: f64, t: f64, out: &mut Vec<(u32, f64)>) {
    let (s, c) = (math::sin(theta), math::cos(theta));
    let (rows, cols) = (g.rows as isize, g.cols as isize);
    let xc = (g.cols as f64 - 1.0) / 2.0;
    let yc = (g.rows as f64 - 1.0) / 2.0;
    let mut push = |r: isize, col: isize, w: f64| {
        if w != 0.0 && (0..rows).contains(&r) && (0..cols).contains(&col) {
            out.push(((r * cols + col) as u32, w));
        }
    };
    if s.abs() >= c.abs() {
        // One sample per column: y = (t - x cos) / sin.
        let step = g.pixel_size / s.abs();
        for col in 0..cols {
            let x = col as f64 - xc;
            let rf = yc - (t - x * c) / s;
            let r0 = math::floor(rf);
            let w = rf - r0;
            push(r0 as isize, col, step * (1.0 - w));
            push(r0 as isize + 1, col, step * w);
        }
    } else {
        // One sample per row: x = (t - y sin) / cos.
        let step = g.pixel_size / c.abs();
        for r in 0..rows {
            let y = yc - r as f64;
            let cf = xc + (t - y * s) / c;
            let c0 = math::floor(cf);
            let w = cf - c0;
            push(r, c0 as isize, step * (1.0 - w));
            push(r, c0 as isize + 1, step * w);
        }
    }
}

impl RadonOperator {
    pub fn new(geometry: RadonGeometry) -> Result<Self> {
        geometry.validate()?;
        let det = geometry.detector_count;
        let per_angle = par::map_indexed(geometry.angles.len(), |a| {
            let theta = geometry.angles[a];
            let mut rays = Vec::with_capacity(det);
            let mut buf = Vec::new();
            for d in 0..det {
                buf.clear();
                trace_ray(&geometry, theta, geometry.detector_position(d), &mut buf);
                rays.push(buf.clone());
            }
            rays
        });
        let mut offsets = vec![0usize];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for rays in per_angle {
            for ray in rays {
                for (i, w) in ray {
                    indices.push(i);
                    values.push(w);
                }
                offsets.push(indices.len());
            }
        }
        let matrix = Csr {
            offsets,
            indices,
            values,
        };
        let transpose = matrix.transpose(geometry.rows * geometry.cols);
        Ok(Self {
            geometry,
            matrix,
            transpose,
        })
    }

    pub fn parallel_beam(rows: usize, cols: usize, n_angles: usize) -> Result<Self> {
        Self::new(RadonGeometry::parallel_beam(rows, cols, n_angles)?)
    }

    pub fn geometry(&self) -> &RadonGeometry {
        &self.geometry
    }

    /// Stored nonzero weights.
    pub fn nnz(&self) -> usize {
        self.matrix.values.len()
    }
}

impl LinearOperator for RadonOperator {
    fn image_dims(&self) -> (usize, usize) {
        (self.geometry.rows, self.geometry.cols)
    }

    fn measurement_len(&self) -> usize {
        self.geometry.angles.len() * self.geometry.detector_count
    }

    fn forward(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.mul(x, y);
    }

    fn adjoint(&self, y: &[f64], x: &mut [f64]) {
        self.transpose.mul(y, x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::gaussian_samples;
    use crate::operator::adjoint_mismatch;

    #[test]
    fn geometry_defaults() {
        let g = RadonGeometry::parallel_beam(128, 128, 36).unwrap();
        assert_eq!(g.angles.len(), 36);
        assert_eq!(g.angles[0], 0.0);
        assert!(g.angles.windows(2).all(|w| w[0] < w[1]));
        assert!(*g.angles.last().unwrap() < core::f64::consts::PI);
        assert_eq!(g.detector_count, 183);
        assert_eq!(g.detector_position(91), 0.0);
        assert_eq!(g.pixel_size, 1.0 / 128.0);
    }

    #[test]
    fn invalid_geometry() {
        assert!(RadonGeometry::parallel_beam(8, 8, 0).is_err());
        let mut g = RadonGeometry::parallel_beam(8, 8, 4).unwrap();
        g.angles[1] = 0.0;
        assert!(RadonOperator::new(g).is_err());
    }

    #[test]
    fn zero_image_gives_zero_sinogram() {
        let op = RadonOperator::parallel_beam(16, 16, 7).unwrap();
        assert!(op.apply(&vec![0.0; 256]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_image_mass_is_preserved_per_angle() {
        // Every angle integrates the whole image, so the detector sum is the
        // pixel sum up to the interpolation ripple.
        let op = RadonOperator::parallel_beam(24, 24, 9).unwrap();
        let x = vec![1.0; 24 * 24];
        let y = op.apply(&x);
        let d = op.geometry().detector_count;
        let expected = 576.0 / 24.0;
        for a in 0..9 {
            let total: f64 = y[a * d..(a + 1) * d].iter().sum();
            assert!((total - expected).abs() < 0.02 * expected, "angle {a}: {total}");
        }
    }

    #[test]
    fn adjoint_identity() {
        let op = RadonOperator::parallel_beam(20, 17, 11).unwrap();
        for seed in 0..10 {
            let x = gaussian_samples(op.image_len(), 1.0, seed);
            let y = gaussian_samples(op.measurement_len(), 1.0, 1000 + seed);
            assert!(adjoint_mismatch(&op, &x, &y) <= 1e-12);
        }
    }
}
