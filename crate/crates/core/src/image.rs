//! Dense grayscale images, boundary extension and noise injection.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Peak value used for 8-bit denoising experiments.
pub const PEAK_8BIT: f64 = 255.0;

/// A row-major grid of finite `f64` intensities with a declared dynamic range.
///
/// `height` is the row count (`m`), `width` the column count (`n`).
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
    peak: f64,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>, peak: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("empty image {height}x{width}")));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "data length {} does not match {height}x{width}",
                data.len()
            )));
        }
        if !(peak.is_finite() && peak > 0.0) {
            return Err(Error::InvalidImage(format!("peak must be positive, got {peak}")));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidImage(format!(
                "non-finite intensity at row {}, column {}",
                i / width,
                i % width
            )));
        }
        Ok(Self {
            width,
            height,
            data,
            peak,
        })
    }

    /// Constant image. Panics on zero size or a non-finite value.
    pub fn filled(width: usize, height: usize, value: f64, peak: f64) -> Self {
        Self::new(width, height, vec![value; width * height], peak).expect("valid constant image")
    }

    pub fn zeros(width: usize, height: usize, peak: f64) -> Self {
        Self::filled(width, height, 0.0, peak)
    }

    /// Builds an image from `f(row, col)`. Panics if `f` yields non-finite values.
    pub fn from_fn(width: usize, height: usize, peak: f64, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::new(width, height, data, peak).expect("valid generated image")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// `(rows, cols)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Mutable access to the pixels. Callers must keep every value finite.
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    pub fn with_peak(mut self, peak: f64) -> Result<Self> {
        if !(peak.is_finite() && peak > 0.0) {
            return Err(Error::InvalidImage(format!("peak must be positive, got {peak}")));
        }
        self.peak = peak;
        Ok(self)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.data.iter().map(|&v| f(v)).collect(),
            self.peak,
        )
    }

    /// Linearly rescales intensities so that the nominal peak becomes `peak`.
    pub fn rescaled(&self, peak: f64) -> Result<Self> {
        let k = peak / self.peak;
        self.map(|v| v * k)?.with_peak(peak)
    }

    pub fn clamp(&self, lo: f64, hi: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v = v.clamp(lo, hi));
        out
    }

    pub fn ensure_same_dims(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: other.dims(),
            });
        }
        Ok(())
    }

    /// Sub-image starting at `(top, left)`.
    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Self> {
        if top + height > self.height || left + width > self.width {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: (top + height, left + width),
            });
        }
        let mut data = Vec::with_capacity(width * height);
        for r in top..top + height {
            data.extend_from_slice(&self.data[r * self.width + left..r * self.width + left + width]);
        }
        Self::new(width, height, data, self.peak)
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }
}

/// How values outside the image are synthesized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Mirror about the edge, repeating the edge sample: `[1,2,3] -> 1 | 1 2 3 | 3`.
    Symmetric,
    /// Point reflection through the edge sample: `v(-i) = 2 v(0) - v(i)`, and
    /// through the corner pixel in the corner blocks. Affine data stays
    /// affine, so planar images carry no boundary curvature.
    PointReflect,
}

/// An image together with a synthesized border of `margin` pixels on every side.
///
/// Coordinates passed to [`PaddedImage::at`] are relative to the original
/// image origin and may be negative.
#[derive(Debug, Clone)]
pub struct PaddedImage {
    width: usize,
    height: usize,
    margin: usize,
    stride: usize,
    boundary: Boundary,
    data: Vec<f64>,
    line: Vec<f64>,
}

impl PaddedImage {
    pub fn new(img: &Image, margin: usize, boundary: Boundary) -> Self {
        let stride = img.width + 2 * margin;
        let rows = img.height + 2 * margin;
        let mut out = Self {
            width: img.width,
            height: img.height,
            margin,
            stride,
            boundary,
            data: vec![0.0; stride * rows],
            line: Vec::new(),
        };
        out.refresh(img);
        out
    }

    /// Re-fills the buffer from `img`, which must have the original dimensions.
    pub fn refresh(&mut self, img: &Image) {
        assert_eq!(img.dims(), (self.height, self.width), "padded image dims");
        let (m, s) = (self.margin, self.stride);
        let boundary = self.boundary;
        for r in 0..self.height {
            let row = &mut self.data[(r + m) * s..(r + m + 1) * s];
            row[m..m + self.width].copy_from_slice(&img.data[r * self.width..(r + 1) * self.width]);
            extend_line(row, m, self.width, boundary);
        }
        let rows = self.height + 2 * m;
        self.line.resize(rows, 0.0);
        for c in 0..s {
            for r in 0..self.height {
                self.line[r + m] = self.data[(r + m) * s + c];
            }
            extend_line(&mut self.line, m, self.height, boundary);
            for r in (0..m).chain(m + self.height..rows) {
                self.data[r * s + c] = self.line[r];
            }
        }
        if boundary == Boundary::PointReflect {
            self.reflect_corners(img);
        }
    }

    // Corner blocks reflected through the corner pixel, `v = 2 u(corner) - u(mirror)`,
    // wherever the mirror lies inside the image.
    fn reflect_corners(&mut self, img: &Image) {
        let (m, s) = (self.margin as isize, self.stride);
        let (h, w) = (self.height as isize, self.width as isize);
        for (r0, c0, dr, dc) in [
            (0, 0, -1, -1),
            (0, w - 1, -1, 1),
            (h - 1, 0, 1, -1),
            (h - 1, w - 1, 1, 1),
        ] {
            let corner = img.data[(r0 * w + c0) as usize];
            for i in 1..=m.min(h - 1) {
                for j in 1..=m.min(w - 1) {
                    let inner = img.data[((r0 - dr * i) * w + (c0 - dc * j)) as usize];
                    let (r, c) = (r0 + dr * i + m, c0 + dc * j + m);
                    self.data[r as usize * s + c as usize] = 2.0 * corner - inner;
                }
            }
        }
    }

    #[inline(always)]
    pub fn at(&self, row: isize, col: isize) -> f64 {
        let r = (row + self.margin as isize) as usize;
        let c = (col + self.margin as isize) as usize;
        debug_assert!(r < self.height + 2 * self.margin && c < self.stride);
        self.data[r * self.stride + c]
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    /// `(rows, cols)` of the unpadded image.
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Whether `(row, col)` lies inside the padded buffer.
    pub fn contains(&self, row: isize, col: isize) -> bool {
        let m = self.margin as isize;
        row >= -m && col >= -m && row < self.height as isize + m && col < self.width as isize + m
    }

    /// The whole padded buffer as an image.
    pub fn to_image(&self, peak: f64) -> Image {
        Image::new(self.stride, self.height + 2 * self.margin, self.data.clone(), peak)
            .expect("padding preserves finiteness")
    }
}

// Fills `line[..margin]` and `line[margin + n..]` from the interior samples
// `line[margin..margin + n]`.
fn extend_line(line: &mut [f64], margin: usize, n: usize, boundary: Boundary) {
    if margin == 0 {
        return;
    }
    match boundary {
        Boundary::Symmetric => {
            let period = 2 * n as isize;
            for i in (0..margin).chain(margin + n..line.len()) {
                let k = (i as isize - margin as isize).rem_euclid(period);
                let src = if k < n as isize { k } else { period - 1 - k };
                line[i] = line[margin + src as usize];
            }
        }
        Boundary::PointReflect => {
            if n == 1 {
                let v = line[margin];
                line[..margin].fill(v);
                line[margin + 1..].fill(v);
                return;
            }
            // Growing outward keeps every right-hand side already defined:
            // index `k` (or its mirror) was filled at an earlier step.
            let first = margin;
            let last = margin + n - 1;
            for k in 1..=margin {
                line[first - k] = 2.0 * line[first] - line[first + k];
                line[last + k] = 2.0 * line[last] - line[last - k];
            }
        }
    }
}

/// Mirror padding by `margin` pixels on every side.
pub fn pad_symmetric(img: &Image, margin: usize) -> Image {
    if margin == 0 {
        return img.clone();
    }
    PaddedImage::new(img, margin, Boundary::Symmetric).to_image(img.peak)
}

/// Additive white Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!("noise sigma must be >= 0, got {sigma}")));
        }
        Ok(Self { sigma, seed })
    }
}

/// Draws `n` independent `N(0, sigma^2)` samples from a ChaCha8 stream.
pub fn gaussian_samples(n: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            sigma * g
        })
        .collect()
}

/// `out = img + N(0, sigma^2)` per pixel, reproducible from `spec.seed`.
/// Values are not clipped.
pub fn add_gaussian_noise(img: &Image, spec: &NoiseSpec) -> Image {
    if spec.sigma == 0.0 {
        return img.clone();
    }
    let noise = gaussian_samples(img.len(), spec.sigma, spec.seed);
    let data = img.data.iter().zip(noise).map(|(v, g)| v + g).collect();
    Image::new(img.width, img.height, data, img.peak).expect("finite noisy image")
}
