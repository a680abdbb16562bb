//! Dyadic patch partitions, four-coloring, restriction and prolongation.
//!
//! Layer `j` tiles the plane with square patches of side `2^j - 1`, starting
//! at the image origin. The patch grid is `ceil(m / side) x ceil(n / side)`,
//! so patches on the bottom/right edge may reach past the image; those pixels
//! come from the boundary extension and are dropped when corrections are
//! applied back to the image.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::MAX_LAYERS;
use crate::image::{Image, PaddedImage};

/// A pixel rectangle in image coordinates. May extend past the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchRect {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl PatchRect {
    pub fn area(&self) -> usize {
        self.height * self.width
    }

    /// The part of the rectangle inside a `rows x cols` image.
    pub fn clipped(&self, rows: usize, cols: usize) -> PatchRect {
        let bottom = (self.top + self.height).min(rows);
        let right = (self.left + self.width).min(cols);
        PatchRect {
            top: self.top,
            left: self.left,
            height: bottom.saturating_sub(self.top),
            width: right.saturating_sub(self.left),
        }
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= self.top && row < self.top + self.height && col >= self.left && col < self.left + self.width
    }
}

/// One layer of the multi-grid hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    layer: usize,
    side: usize,
    rows: usize,
    cols: usize,
    patch_rows: usize,
    patch_cols: usize,
}

impl Partition {
    pub fn new(layer: usize, rows: usize, cols: usize) -> Result<Self> {
        if !(1..=MAX_LAYERS).contains(&layer) {
            return Err(Error::LayerOutOfRange(layer));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidImage(format!("empty domain {rows}x{cols}")));
        }
        let side = (1 << layer) - 1;
        Ok(Self {
            layer,
            side,
            rows,
            cols,
            patch_rows: rows.div_ceil(side),
            patch_cols: cols.div_ceil(side),
        })
    }

    pub fn layer(&self) -> usize {
        self.layer
    }

    /// Patch side length `2^layer - 1`.
    pub fn patch_side(&self) -> usize {
        self.side
    }

    /// `(m_j, n_j)`.
    pub fn patch_dims(&self) -> (usize, usize) {
        (self.patch_rows, self.patch_cols)
    }

    /// `N_j = m_j * n_j`.
    pub fn patch_count(&self) -> usize {
        self.patch_rows * self.patch_cols
    }

    /// Image dims the partition was built for.
    pub fn image_dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Dims of the padded domain covered by all patches.
    pub fn covered_dims(&self) -> (usize, usize) {
        (self.patch_rows * self.side, self.patch_cols * self.side)
    }

    /// `(i1, i2)` of row-major patch index `i`.
    pub fn patch_coords(&self, index: usize) -> (usize, usize) {
        (index / self.patch_cols, index % self.patch_cols)
    }

    pub fn patch_rect(&self, index: usize) -> PatchRect {
        let (i1, i2) = self.patch_coords(index);
        PatchRect {
            top: i1 * self.side,
            left: i2 * self.side,
            height: self.side,
            width: self.side,
        }
    }

    /// Central pixel of patch `index`.
    pub fn patch_center(&self, index: usize) -> (isize, isize) {
        let rect = self.patch_rect(index);
        let half = (self.side - 1) / 2;
        ((rect.top + half) as isize, (rect.left + half) as isize)
    }

    /// Color in `0..4`: `2 (i1 mod 2) + (i2 mod 2)`.
    pub fn color_of(&self, index: usize) -> usize {
        let (i1, i2) = self.patch_coords(index);
        2 * (i1 % 2) + (i2 % 2)
    }

    /// Boundary margin a padded snapshot needs for this layer: the patch
    /// overhang past the image plus the tangent-plane stencil radius.
    pub fn required_margin(&self) -> usize {
        self.side + (1 << (self.layer - 1))
    }
}

/// Partitions for layers `1..=layers`.
pub fn build_hierarchy(rows: usize, cols: usize, layers: usize) -> Result<Vec<Partition>> {
    if layers == 0 {
        return Err(Error::InvalidConfig("at least one layer is required".into()));
    }
    if layers > MAX_LAYERS {
        return Err(Error::LayerOutOfRange(layers));
    }
    (1..=layers).map(|j| Partition::new(j, rows, cols)).collect()
}

/// Patch indices grouped by color. Patches of one color never share an edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorClasses {
    classes: [Vec<usize>; 4],
}

impl ColorClasses {
    pub fn class(&self, color: usize) -> &[usize] {
        &self.classes[color]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.classes.iter().map(|c| c.as_slice())
    }

    pub fn sizes(&self) -> [usize; 4] {
        [
            self.classes[0].len(),
            self.classes[1].len(),
            self.classes[2].len(),
            self.classes[3].len(),
        ]
    }
}

pub fn color(partition: &Partition) -> ColorClasses {
    let mut classes: [Vec<usize>; 4] = Default::default();
    for i in 0..partition.patch_count() {
        classes[partition.color_of(i)].push(i);
    }
    ColorClasses { classes }
}

/// Patch mean of `f - u` and the patch pixel count `s`.
pub fn restrict_fidelity(f: &PaddedImage, u: &PaddedImage, rect: &PatchRect) -> Result<(f64, usize)> {
    let s = rect.area();
    if s == 0 {
        return Err(Error::EmptyPatch);
    }
    let mut acc = 0.0;
    for r in rect.top..rect.top + rect.height {
        for c in rect.left..rect.left + rect.width {
            let (r, c) = (r as isize, c as isize);
            acc += f.at(r, c) - u.at(r, c);
        }
    }
    Ok((acc / s as f64, s))
}

/// Per-patch scalar corrections arranged `m_j x n_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionField {
    patch_rows: usize,
    patch_cols: usize,
    values: Vec<f64>,
}

impl CorrectionField {
    pub fn new(patch_rows: usize, patch_cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != patch_rows * patch_cols {
            return Err(Error::DimensionMismatch {
                expected: (patch_rows, patch_cols),
                found: (values.len(), 1),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidImage("non-finite correction".into()));
        }
        Ok(Self {
            patch_rows,
            patch_cols,
            values,
        })
    }

    pub fn zeros(partition: &Partition) -> Self {
        let (r, c) = partition.patch_dims();
        Self {
            patch_rows: r,
            patch_cols: c,
            values: vec![0.0; r * c],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.patch_rows, self.patch_cols)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn set(&mut self, index: usize, value: f64) {
        self.values[index] = value;
    }
}

/// Piecewise-constant injection of `c` onto a `target` = `(rows, cols)` grid.
///
/// `target` may be anything from the image dims up to the covered dims; the
/// patch grid is cropped to it. The returned delta image has peak 1.
pub fn prolongate(c: &CorrectionField, partition: &Partition, target: (usize, usize)) -> Result<Image> {
    if c.dims() != partition.patch_dims() {
        return Err(Error::DimensionMismatch {
            expected: partition.patch_dims(),
            found: c.dims(),
        });
    }
    let side = partition.patch_side();
    let (rows, cols) = target;
    let (cov_r, cov_c) = partition.covered_dims();
    if rows > cov_r || cols > cov_c || rows + side <= cov_r || cols + side <= cov_c {
        return Err(Error::DimensionMismatch {
            expected: partition.covered_dims(),
            found: target,
        });
    }
    Ok(Image::from_fn(cols, rows, 1.0, |r, col| {
        c.values[(r / side) * c.patch_cols + col / side]
    }))
}

/// `u += sum_i c_i phi_i` for the listed `(patch, correction)` pairs, dropping
/// pixels outside `u`.
pub fn apply_corrections(u: &mut Image, partition: &Partition, corrections: &[(usize, f64)]) {
    let (rows, cols) = u.dims();
    let width = u.width();
    let data = u.data_mut();
    for &(index, c) in corrections {
        if c == 0.0 {
            continue;
        }
        let rect = partition.patch_rect(index).clipped(rows, cols);
        for r in rect.top..rect.top + rect.height {
            for v in &mut data[r * width + rect.left..r * width + rect.left + rect.width] {
                *v += c;
            }
        }
    }
}
