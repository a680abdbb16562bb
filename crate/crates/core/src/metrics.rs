//! Image quality metrics.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::math;

/// Returned by [`psnr`] when the two images are identical.
pub const PSNR_IDENTICAL: f64 = f64::INFINITY;

/// SSIM window side length.
pub const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// Summary of one solver run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub psnr: f64,
    pub ssim: f64,
    pub energy: f64,
    pub iterations: usize,
    pub wall_time: f64,
}

fn check_pair(a: &Image, b: &Image) -> Result<()> {
    a.ensure_same_dims(b)
}

pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    check_pair(a, b)?;
    let sum: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

/// Peak signal-to-noise ratio in dB using `a.peak()` as the dynamic range.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    let mse = mse(a, b)?;
    if mse == 0.0 {
        return Ok(PSNR_IDENTICAL);
    }
    let peak = a.peak();
    Ok(10.0 * math::log10(peak * peak / mse))
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let x = i as f64 - half;
        *v = math::exp(-x * x / (2.0 * SSIM_SIGMA * SSIM_SIGMA));
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

// Separable "valid" Gaussian filter: output is (h - 10) x (w - 10).
fn filter_valid(data: &[f64], width: usize, height: usize, kernel: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = width - SSIM_WINDOW + 1;
    let oh = height - SSIM_WINDOW + 1;
    let mut horiz = vec![0.0; height * ow];
    for r in 0..height {
        let row = &data[r * width..(r + 1) * width];
        for c in 0..ow {
            horiz[r * ow + c] = kernel.iter().zip(&row[c..c + SSIM_WINDOW]).map(|(k, v)| k * v).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            let mut acc = 0.0;
            for (k, kv) in kernel.iter().enumerate() {
                acc += kv * horiz[(r + k) * ow + c];
            }
            out[r * ow + c] = acc;
        }
    }
    out
}

/// Mean structural similarity over all 11x11 Gaussian windows (sigma 1.5,
/// K1 = 0.01, K2 = 0.03, L = `a.peak()`).
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    check_pair(a, b)?;
    let (h, w) = a.dims();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::ImageTooSmall {
            height: h,
            width: w,
            window: SSIM_WINDOW,
        });
    }
    let kernel = gaussian_window();
    let x = a.data();
    let y = b.data();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(p, q)| p * q).collect();

    let mu_x = filter_valid(x, w, h, &kernel);
    let mu_y = filter_valid(y, w, h, &kernel);
    let e_xx = filter_valid(&xx, w, h, &kernel);
    let e_yy = filter_valid(&yy, w, h, &kernel);
    let e_xy = filter_valid(&xy, w, h, &kernel);

    let l = a.peak();
    let c1 = (SSIM_K1 * l) * (SSIM_K1 * l);
    let c2 = (SSIM_K2 * l) * (SSIM_K2 * l);
    let mut total = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let vx = e_xx[i] - mx * mx;
        let vy = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    Ok(total / mu_x.len() as f64)
}
