//! Local tangent planes of the image surface `(row, col, u)` and the
//! curvature quantities derived from them.
//!
//! A tangent plane at layer `j` passes through three surface points around a
//! center pixel: an opposite pair `P`, `-P` on the square ring of Chebyshev
//! radius `r = 2^(j-1)`, and one of the two ring points perpendicular to
//! `P`. The ring holds `4r` opposite pairs, each contributing two planes, so a
//! layer carries `2^(j+2)` planes. Layer 1 is the 3x3 set
//!
//! ```text
//! (W,E,N) (W,E,S) (N,S,W) (N,S,E) (NW,SE,NE) (NW,SE,SW) (NE,SW,NW) (NE,SW,SE)
//! ```
//!
//! and every coarser layer starts with the same eight planes scaled by `r`.
//!
//! The signed distance `d` of the center to a plane is taken along the unit
//! normal with positive vertical component, measured from the center to the
//! plane: `d > 0` when the plane lies above the center. For the `(W,E,N)`
//! plane this is
//!
//! ```text
//!            u[W] + u[E] - 2 u[O]
//! d = ---------------------------------------------
//!     sqrt((u[W] + u[E] - 2 u[N])^2 + (u[E] - u[W])^2 + 4)
//! ```
//!
//! so `u + mean(d)` moves the center toward the planes (flattening).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fbs::CurvatureMode;
use crate::image::{Boundary, Image, PaddedImage};
use crate::math;
use crate::par;

/// Deepest supported layer.
pub const MAX_LAYERS: usize = 6;

/// A grid offset `(row, col)` relative to a center pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Offset {
    pub dr: i32,
    pub dc: i32,
}

impl Offset {
    pub const fn new(dr: i32, dc: i32) -> Self {
        Self { dr, dc }
    }

    pub fn neg(self) -> Self {
        Self::new(-self.dr, -self.dc)
    }

    pub fn scale(self, k: i32) -> Self {
        Self::new(self.dr * k, self.dc * k)
    }

    pub fn norm_sq(self) -> i64 {
        (self.dr as i64) * (self.dr as i64) + (self.dc as i64) * (self.dc as i64)
    }

    pub fn chebyshev(self) -> i32 {
        self.dr.abs().max(self.dc.abs())
    }

    // Quarter turn: (dr, dc) -> (-dc, dr).
    fn perp(self) -> Self {
        Self::new(-self.dc, self.dr)
    }
}

/// Three anchor offsets: `anchors[0]` and `anchors[1]` are the opposite pair,
/// `anchors[2]` the perpendicular point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TangentPlane {
    pub anchors: [Offset; 3],
}

impl TangentPlane {
    pub const fn new(a: Offset, b: Offset, c: Offset) -> Self {
        Self { anchors: [a, b, c] }
    }

    /// Squared grid arc length of the primary neighbor offset (`ds^2`).
    pub fn arc_length_sq(&self) -> f64 {
        self.anchors[0].norm_sq() as f64
    }

    /// The point-reflected plane.
    pub fn reflected(&self) -> Self {
        Self::new(self.anchors[0].neg(), self.anchors[1].neg(), self.anchors[2].neg())
    }

    /// Same plane regardless of anchor order.
    pub fn same_points(&self, other: &TangentPlane) -> bool {
        self.anchors.iter().all(|a| other.anchors.contains(a))
    }
}

const W: Offset = Offset::new(0, -1);
const E: Offset = Offset::new(0, 1);
const N: Offset = Offset::new(-1, 0);
const S: Offset = Offset::new(1, 0);
const NW: Offset = Offset::new(-1, -1);
const NE: Offset = Offset::new(-1, 1);
const SW: Offset = Offset::new(1, -1);
const SE: Offset = Offset::new(1, 1);

const FINEST: [TangentPlane; 8] = [
    TangentPlane::new(W, E, N),
    TangentPlane::new(W, E, S),
    TangentPlane::new(N, S, W),
    TangentPlane::new(N, S, E),
    TangentPlane::new(NW, SE, NE),
    TangentPlane::new(NW, SE, SW),
    TangentPlane::new(NE, SW, NW),
    TangentPlane::new(NE, SW, SE),
];

/// The enumerated tangent planes of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPlaneSet {
    layer: usize,
    planes: Vec<TangentPlane>,
}

impl TangentPlaneSet {
    pub fn new(layer: usize) -> Result<Self> {
        if !(1..=MAX_LAYERS).contains(&layer) {
            return Err(Error::LayerOutOfRange(layer));
        }
        let r = 1i32 << (layer - 1);
        let mut planes: Vec<TangentPlane> = FINEST
            .iter()
            .map(|p| TangentPlane::new(p.anchors[0].scale(r), p.anchors[1].scale(r), p.anchors[2].scale(r)))
            .collect();

        // Remaining ring pairs, one representative each, ordered by angle.
        let mut extra: Vec<(f64, Offset)> = Vec::new();
        for dr in -r..=r {
            for dc in -r..=r {
                let p = Offset::new(dr, dc);
                if p.chebyshev() != r || dr == 0 || dc == 0 || dr.abs() == dc.abs() {
                    continue;
                }
                // Half ring: dr > 0 picks one point per pair.
                if dr > 0 {
                    extra.push((math::atan2(dr as f64, dc as f64), p));
                }
            }
        }
        extra.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, p) in extra {
            let q = p.perp();
            planes.push(TangentPlane::new(p, p.neg(), q));
            planes.push(TangentPlane::new(p, p.neg(), q.neg()));
        }
        debug_assert_eq!(planes.len(), 1 << (layer + 2));
        Ok(Self { layer, planes })
    }

    pub fn layer(&self) -> usize {
        self.layer
    }

    /// Number of planes, `2^(layer + 2)`.
    pub fn count(&self) -> usize {
        self.planes.len()
    }

    pub fn planes(&self) -> &[TangentPlane] {
        &self.planes
    }

    /// Chebyshev radius of the stencil, `2^(layer - 1)`.
    pub fn radius(&self) -> usize {
        1 << (self.layer - 1)
    }
}

/// Convenience wrapper for [`TangentPlaneSet::new`].
pub fn plane_set(layer: usize) -> Result<TangentPlaneSet> {
    TangentPlaneSet::new(layer)
}

/// Plane geometry relative to the center: `dot = n . (X - O)`, `norm = |n|`
/// and `nz = n_z > 0`, with `n` the (unnormalized) upward normal.
#[derive(Debug, Clone, Copy)]
struct PlaneFrame {
    dot: f64,
    norm: f64,
    nz: f64,
}

impl PlaneFrame {
    #[inline(always)]
    fn distance(&self) -> f64 {
        self.dot / self.norm
    }

    // Vertical offset from the center to the plane.
    #[inline(always)]
    fn vertical(&self) -> f64 {
        self.dot / self.nz
    }
}

#[inline(always)]
fn frame(u: &PaddedImage, row: isize, col: isize, plane: &TangentPlane) -> PlaneFrame {
    frame_shifted(u, row, col, plane, 0.0)
}

// Same as `frame` with the center raised by `shift`.
#[inline(always)]
fn frame_shifted(u: &PaddedImage, row: isize, col: isize, plane: &TangentPlane, shift: f64) -> PlaneFrame {
    let o = u.at(row, col) + shift;
    let [a, b, c] = plane.anchors;
    let pt = |q: Offset| {
        (
            q.dr as f64,
            q.dc as f64,
            u.at(row + q.dr as isize, col + q.dc as isize) - o,
        )
    };
    let x = pt(a);
    let y = pt(b);
    let z = pt(c);
    let e1 = (y.0 - x.0, y.1 - x.1, y.2 - x.2);
    let e2 = (z.0 - x.0, z.1 - x.1, z.2 - x.2);
    let mut n = (
        e1.1 * e2.2 - e1.2 * e2.1,
        e1.2 * e2.0 - e1.0 * e2.2,
        e1.0 * e2.1 - e1.1 * e2.0,
    );
    assert!(n.2 != 0.0, "degenerate tangent plane {plane:?}");
    if n.2 < 0.0 {
        n = (-n.0, -n.1, -n.2);
    }
    PlaneFrame {
        dot: n.0 * x.0 + n.1 * x.1 + n.2 * x.2,
        norm: math::sqrt(n.0 * n.0 + n.1 * n.1 + n.2 * n.2),
        nz: n.2,
    }
}

/// Signed distance from the surface point at `center` to `plane`.
///
/// `center` is `(row, col)` in the unpadded image's coordinates; the whole
/// stencil must lie inside the padded buffer.
pub fn plane_distance(u: &PaddedImage, center: (isize, isize), plane: &TangentPlane) -> f64 {
    frame(u, center.0, center.1, plane).distance()
}

/// [`plane_distance`] after raising the center pixel by `shift`.
pub fn shifted_plane_distance(u: &PaddedImage, center: (isize, isize), plane: &TangentPlane, shift: f64) -> f64 {
    frame_shifted(u, center.0, center.1, plane, shift).distance()
}

/// Vertical offset that places the center on `plane`.
pub fn plane_vertical_offset(u: &PaddedImage, center: (isize, isize), plane: &TangentPlane) -> f64 {
    frame(u, center.0, center.1, plane).vertical()
}

/// Distances to every plane of `set`, in plane order.
pub fn distances(u: &PaddedImage, center: (isize, isize), set: &TangentPlaneSet) -> Vec<f64> {
    set.planes.iter().map(|p| plane_distance(u, center, p)).collect()
}

/// Mean-curvature-minimizing correction: the average plane distance.
pub fn mean_correction(d: &[f64]) -> f64 {
    assert!(!d.is_empty(), "mean_correction of an empty distance vector");
    d.iter().sum::<f64>() / d.len() as f64
}

/// `mean_correction(distances(..))` without the intermediate allocation.
pub fn mean_distance(u: &PaddedImage, center: (isize, isize), set: &TangentPlaneSet) -> f64 {
    let mut acc = 0.0;
    for p in &set.planes {
        acc += plane_distance(u, center, p);
    }
    acc / set.planes.len() as f64
}

/// [`mean_distance`] after raising the center pixel by `shift`.
pub fn shifted_mean_distance(u: &PaddedImage, center: (isize, isize), set: &TangentPlaneSet, shift: f64) -> f64 {
    let mut acc = 0.0;
    for p in &set.planes {
        acc += shifted_plane_distance(u, center, p, shift);
    }
    acc / set.planes.len() as f64
}

/// Normal curvature estimates `d / ds^2`.
pub fn normal_curvatures(d: &[f64], set: &TangentPlaneSet) -> Vec<f64> {
    assert_eq!(d.len(), set.count(), "distance vector does not match plane set");
    d.iter().zip(&set.planes).map(|(d, p)| d / p.arc_length_sq()).collect()
}

/// Principal curvature estimates at one pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureEstimate {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub mean_h: f64,
    pub gauss_k: f64,
    /// Plane attaining the principal curvature of smaller magnitude.
    pub star_index: usize,
    min_index: usize,
    max_index: usize,
}

impl CurvatureEstimate {
    fn from_curvatures(kappas: impl Iterator<Item = f64>) -> Self {
        let mut kmin = f64::INFINITY;
        let mut kmax = f64::NEG_INFINITY;
        let (mut imin, mut imax) = (0, 0);
        for (i, k) in kappas.enumerate() {
            if k < kmin {
                kmin = k;
                imin = i;
            }
            if k > kmax {
                kmax = k;
                imax = i;
            }
        }
        let star_index = if kmin.abs() <= kmax.abs() { imin } else { imax };
        Self {
            kappa_min: kmin,
            kappa_max: kmax,
            mean_h: 0.5 * (kmin + kmax),
            gauss_k: kmin * kmax,
            star_index,
            min_index: imin,
            max_index: imax,
        }
    }

    /// The principal curvature of smaller magnitude (ties go to `kappa_min`).
    pub fn kappa_star(&self) -> f64 {
        if self.kappa_min.abs() <= self.kappa_max.abs() {
            self.kappa_min
        } else {
            self.kappa_max
        }
    }

    pub fn min_index(&self) -> usize {
        self.min_index
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }
}

pub fn curvature_estimate(u: &PaddedImage, center: (isize, isize), set: &TangentPlaneSet) -> CurvatureEstimate {
    CurvatureEstimate::from_curvatures(
        set.planes
            .iter()
            .map(|p| plane_distance(u, center, p) / p.arc_length_sq()),
    )
}

/// [`curvature_estimate`] after raising the center pixel by `shift`.
pub fn shifted_curvature_estimate(
    u: &PaddedImage,
    center: (isize, isize),
    set: &TangentPlaneSet,
    shift: f64,
) -> CurvatureEstimate {
    CurvatureEstimate::from_curvatures(
        set.planes
            .iter()
            .map(|p| shifted_plane_distance(u, center, p, shift) / p.arc_length_sq()),
    )
}

/// The plane the Gaussian correction moves onto, and the correction itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTarget {
    pub plane_index: usize,
    pub correction: f64,
}

/// Gaussian-curvature-minimizing correction.
///
/// Raising the center by `c` lowers every normal curvature linearly,
/// `kappa_l(c) = (v_l - c) * w_l` with `v_l` the vertical offset to plane `l`
/// and `w_l > 0`. When `kappa_min` is the principal curvature of smaller
/// magnitude the correction is `min_l v_l`: afterwards every `kappa_l >= 0`
/// and one is exactly zero, so the estimated `K` vanishes. The `kappa_max`
/// side uses `max_l v_l` symmetrically. The selected plane is returned so
/// callers can check that its distance re-evaluates to zero.
pub fn gaussian_target(u: &PaddedImage, center: (isize, isize), set: &TangentPlaneSet) -> GaussianTarget {
    shifted_gaussian_target(u, center, set, 0.0)
}

/// [`gaussian_target`] after raising the center pixel by `shift`.
pub fn shifted_gaussian_target(
    u: &PaddedImage,
    center: (isize, isize),
    set: &TangentPlaneSet,
    shift: f64,
) -> GaussianTarget {
    let est = shifted_curvature_estimate(u, center, set, shift);
    let toward_min = est.kappa_min.abs() <= est.kappa_max.abs();
    let mut best = GaussianTarget {
        plane_index: 0,
        correction: if toward_min { f64::INFINITY } else { f64::NEG_INFINITY },
    };
    for (i, p) in set.planes.iter().enumerate() {
        let v = frame_shifted(u, center.0, center.1, p, shift).vertical();
        let better = if toward_min {
            v < best.correction
        } else {
            v > best.correction
        };
        if better {
            best = GaussianTarget {
                plane_index: i,
                correction: v,
            };
        }
    }
    best
}

/// The plane needing the smallest vertical move of the center, i.e. the
/// least change of `u` that zeroes one normal curvature.
pub fn nearest_plane_target(
    u: &PaddedImage,
    center: (isize, isize),
    set: &TangentPlaneSet,
    shift: f64,
) -> GaussianTarget {
    let mut best = GaussianTarget {
        plane_index: 0,
        correction: f64::INFINITY,
    };
    for (i, p) in set.planes.iter().enumerate() {
        let v = frame_shifted(u, center.0, center.1, p, shift).vertical();
        if v.abs() < best.correction.abs() {
            best = GaussianTarget {
                plane_index: i,
                correction: v,
            };
        }
    }
    best
}

pub fn gaussian_correction(u: &PaddedImage, center: (isize, isize), set: &TangentPlaneSet) -> f64 {
    gaussian_target(u, center, set).correction
}

/// `|H|` or `|K|` at one pixel from the layer-1 planes, without allocating.
#[inline]
pub(crate) fn pixel_curvature_magnitude(u: &PaddedImage, row: isize, col: isize, mode: CurvatureMode) -> f64 {
    let mut kmin = f64::INFINITY;
    let mut kmax = f64::NEG_INFINITY;
    for p in &FINEST {
        let k = frame(u, row, col, p).distance() / p.arc_length_sq();
        kmin = kmin.min(k);
        kmax = kmax.max(k);
    }
    match mode {
        CurvatureMode::Mean => (0.5 * (kmin + kmax)).abs(),
        CurvatureMode::Gaussian => (kmin * kmax).abs(),
    }
}

/// Sum of `|H|` (or `|K|`) over all pixels, using layer-1 estimates on the
/// point-reflected extension of `u`.
pub fn curvature_total(u: &Image, mode: CurvatureMode) -> f64 {
    let padded = PaddedImage::new(u, 1, Boundary::PointReflect);
    curvature_total_padded(&padded, mode)
}

pub(crate) fn curvature_total_padded(u: &PaddedImage, mode: CurvatureMode) -> f64 {
    let (rows, cols) = u.dims();
    let row_sums = par::map_indexed(rows, |r| {
        let mut acc = 0.0;
        for c in 0..cols {
            acc += pixel_curvature_magnitude(u, r as isize, c as isize, mode);
        }
        acc
    });
    row_sums.into_iter().sum()
}

/// Discrete energy `sum |H(u)| + (alpha/2) sum (u - f)^2` (or `|K|` in
/// Gaussian mode).
pub fn energy(u: &Image, f: &Image, alpha: f64, mode: CurvatureMode) -> Result<f64> {
    u.ensure_same_dims(f)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidConfig(alloc::format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let fidelity: f64 = u.data().iter().zip(f.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(curvature_total(u, mode) + 0.5 * alpha * fidelity)
}

/// [`energy`] of `u / P` against `f / P`, `P = f.peak()`: the objective on
/// the unit intensity scale.
pub fn normalized_energy(u: &Image, f: &Image, alpha: f64, mode: CurvatureMode) -> Result<f64> {
    let p = f.peak();
    if p == 1.0 {
        return energy(u, f, alpha, mode);
    }
    energy(&u.map(|v| v / p)?, &f.map(|v| v / p)?, alpha, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Image;

    fn padded_3x3(v: [[f64; 3]; 3]) -> PaddedImage {
        let img = Image::from_fn(3, 3, 255.0, |r, c| v[r][c]);
        PaddedImage::new(&img, 0, Boundary::PointReflect)
    }

    #[test]
    fn plane_counts() {
        assert_eq!(plane_set(1).unwrap().count(), 8);
        assert_eq!(plane_set(2).unwrap().count(), 16);
        assert_eq!(plane_set(3).unwrap().count(), 32);
        assert_eq!(plane_set(6).unwrap().count(), 256);
        assert!(matches!(plane_set(0), Err(Error::LayerOutOfRange(0))));
        assert!(matches!(plane_set(7), Err(Error::LayerOutOfRange(7))));
    }

    #[test]
    fn planes_are_centrosymmetric_and_well_posed() {
        for layer in 1..=MAX_LAYERS {
            let set = plane_set(layer).unwrap();
            let r = set.radius() as i32;
            for p in set.planes() {
                assert!(set.planes().iter().any(|q| q.same_points(&p.reflected())));
                for a in p.anchors {
                    assert_ne!(a, Offset::new(0, 0));
                    assert_eq!(a.chebyshev(), r);
                }
                let [a, b, c] = p.anchors;
                let cross = (b.dr - a.dr) as i64 * (c.dc - a.dc) as i64 - (b.dc - a.dc) as i64 * (c.dr - a.dr) as i64;
                assert_ne!(cross, 0, "collinear anchors {p:?}");
            }
        }
    }

    #[test]
    fn coarse_sets_contain_scaled_finest_planes() {
        for layer in 2..=MAX_LAYERS {
            let set = plane_set(layer).unwrap();
            let k = set.radius() as i32;
            for (i, p) in FINEST.iter().enumerate() {
                let scaled = TangentPlane::new(p.anchors[0].scale(k), p.anchors[1].scale(k), p.anchors[2].scale(k));
                assert_eq!(set.planes()[i], scaled);
            }
        }
    }

    #[test]
    fn layer_one_matches_listing() {
        let set = plane_set(1).unwrap();
        assert_eq!(set.planes(), &FINEST);
    }

    #[test]
    fn distance_example_patch() {
        // u[W] = u[E] = u[N] = 0, u[O] = 1: numerator -2, denominator 2.
        let u = padded_3x3([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]);
        let d = plane_distance(&u, (1, 1), &FINEST[0]);
        assert_eq!(d, -1.0);
        // Independent route: height of O above the plane z = 0 is 1.
        assert_eq!(plane_vertical_offset(&u, (1, 1), &FINEST[0]), -1.0);
    }

    #[test]
    fn affine_patches_are_flat() {
        let img = Image::from_fn(9, 9, 255.0, |r, c| 3.0 * r as f64 - 5.0 * c as f64 + 11.0);
        let u = PaddedImage::new(&img, 0, Boundary::PointReflect);
        for layer in 1..=2 {
            let set = plane_set(layer).unwrap();
            let d = distances(&u, (4, 4), &set);
            assert!(d.iter().all(|&v| v == 0.0), "{d:?}");
        }
    }

    #[test]
    fn negation_is_odd() {
        let v = [[0.3, 1.7, -2.0], [0.5, 4.0, 0.25], [-1.5, 2.0, 0.9]];
        let u = padded_3x3(v);
        let neg = padded_3x3(v.map(|r| r.map(|x| -x)));
        for p in &FINEST {
            assert_eq!(plane_distance(&u, (1, 1), p), -plane_distance(&neg, (1, 1), p));
        }
    }

    #[test]
    fn mean_correction_examples() {
        assert_eq!(mean_correction(&[0.0; 8]), 0.0);
        assert_eq!(mean_correction(&[1.0, -1.0, 2.0, -2.0, 0.5, -0.5, 3.0, -3.0]), 0.0);
        assert_eq!(mean_correction(&[-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]), -0.125);
    }

    #[test]
    fn normal_curvature_scaling() {
        let set = plane_set(1).unwrap();
        let mut d = [0.0; 8];
        d[0] = 0.5; // axis pair, ds^2 = 1
        d[4] = 0.5; // diagonal pair, ds^2 = 2
        let k = normal_curvatures(&d, &set);
        assert_eq!(k[0], 0.5);
        assert_eq!(k[4], 0.25);
        assert!(k.iter().enumerate().all(|(i, &v)| i == 0 || i == 4 || v == 0.0));
    }

    #[test]
    fn flat_patch_has_no_curvature() {
        let u = padded_3x3([[2.0; 3]; 3]);
        let set = plane_set(1).unwrap();
        let est = curvature_estimate(&u, (1, 1), &set);
        assert_eq!((est.mean_h, est.gauss_k), (0.0, 0.0));
        assert_eq!(gaussian_correction(&u, (1, 1), &set), 0.0);
    }

    #[test]
    fn bump_and_saddle_signs() {
        let set = plane_set(1).unwrap();
        // Downward paraboloid: the center is above every plane.
        let bump = Image::from_fn(5, 5, 255.0, |r, c| {
            let (x, y) = (r as f64 - 2.0, c as f64 - 2.0);
            -(x * x + y * y)
        });
        let u = PaddedImage::new(&bump, 0, Boundary::PointReflect);
        let est = curvature_estimate(&u, (2, 2), &set);
        assert!(est.kappa_min < 0.0 && est.kappa_max < 0.0);
        assert!(est.gauss_k > 0.0);
        assert!((est.kappa_min - est.kappa_max).abs() < 0.5 * est.kappa_max.abs());

        let saddle = Image::from_fn(5, 5, 255.0, |r, c| (r as f64 - 2.0) * (c as f64 - 2.0));
        let u = PaddedImage::new(&saddle, 0, Boundary::PointReflect);
        let est = curvature_estimate(&u, (2, 2), &set);
        assert!(est.kappa_min < 0.0 && est.kappa_max > 0.0);
        assert!(est.gauss_k <= 0.0);
    }

    #[test]
    fn energy_examples() {
        let f = Image::filled(7, 5, 9.0, 255.0);
        assert_eq!(energy(&f, &f, 0.06, CurvatureMode::Mean).unwrap(), 0.0);
        let ramp = Image::from_fn(7, 5, 255.0, |r, c| 2.0 * r as f64 + c as f64);
        assert_eq!(energy(&ramp, &ramp, 0.06, CurvatureMode::Mean).unwrap(), 0.0);
        assert_eq!(energy(&ramp, &ramp, 0.06, CurvatureMode::Gaussian).unwrap(), 0.0);
        let shifted = ramp.map(|v| v + 1.0).unwrap();
        let e = energy(&shifted, &ramp, 0.5, CurvatureMode::Mean).unwrap();
        assert_eq!(e, 0.5 / 2.0 * 35.0);
        assert!(energy(&ramp, &Image::zeros(5, 5, 255.0), 0.1, CurvatureMode::Mean).is_err());
        assert!(energy(&ramp, &ramp, 0.0, CurvatureMode::Mean).is_err());
    }
}
