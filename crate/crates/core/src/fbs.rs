//! Forward-backward splitting for the one-dimensional patch problem
//!
//! ```text
//! J(c) = |H(u + c phi)| + (alpha s / 2) (c - f*)^2
//! ```
//!
//! The forward step minimizes the curvature term in closed form (mean of the
//! plane distances, or the smallest offset onto a tangent plane in Gaussian mode). The backward step
//! minimizes
//!
//! ```text
//! (alpha s / 2)(c - f*)^2 + (c - c_t)^2 / (2 eta_t) + (c - c_half)^2 / (2 eta_t)
//! ```
//!
//! whose minimizer is `(c_t + c_half + eta_t alpha s f*) / (2 + eta_t alpha s)`.

use alloc::vec::Vec;
use core::str::FromStr;

use crate::error::Error;
use crate::geometry::{nearest_plane_target, shifted_mean_distance, TangentPlaneSet};
use crate::image::PaddedImage;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurvatureMode {
    #[default]
    Mean,
    Gaussian,
}

impl CurvatureMode {
    pub fn name(self) -> &'static str {
        match self {
            CurvatureMode::Mean => "mean",
            CurvatureMode::Gaussian => "gaussian",
        }
    }
}

impl FromStr for CurvatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "mean" => Ok(CurvatureMode::Mean),
            "gaussian" => Ok(CurvatureMode::Gaussian),
            other => Err(Error::InvalidConfig(alloc::format!("unknown curvature mode `{other}`"))),
        }
    }
}

/// Step sizes `eta_0 = 1`, `eta_{t+1} = 1 / sqrt(1 + t)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepSchedule;

impl StepSchedule {
    pub fn eta(t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            1.0 / math::sqrt(t as f64)
        }
    }
}

/// One patch's correction problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalProblem {
    /// Central pixel of the patch.
    pub center: (isize, isize),
    /// Patch mean of `f - u`.
    pub f_star: f64,
    /// Patch pixel count.
    pub s: usize,
    pub alpha: f64,
    pub mode: CurvatureMode,
}

/// Closed-form minimizer of the curvature term at the patch center.
pub fn forward_step(u: &PaddedImage, center: (isize, isize), set: &TangentPlaneSet, mode: CurvatureMode) -> f64 {
    shifted_forward_step(u, center, set, mode, 0.0)
}

/// [`forward_step`] for `u + shift` at the center, i.e. the increment on top
/// of an existing correction `shift`.
pub fn shifted_forward_step(
    u: &PaddedImage,
    center: (isize, isize),
    set: &TangentPlaneSet,
    mode: CurvatureMode,
    shift: f64,
) -> f64 {
    match mode {
        CurvatureMode::Mean => shifted_mean_distance(u, center, set, shift),
        CurvatureMode::Gaussian => nearest_plane_target(u, center, set, shift).correction,
    }
}

#[inline]
pub fn backward_step(c_t: f64, c_half: f64, eta: f64, alpha: f64, s: usize, f_star: f64) -> f64 {
    let w = alpha * eta * s as f64;
    (c_t + c_half + w * f_star) / (2.0 + w)
}

/// Runs `iterations` FBS passes from `c_0 = 0` with a caller-supplied forward
/// step `forward(c_t, eta_t)`, returning `c_1, ..., c_T`.
pub fn fbs_iterates(
    mut forward: impl FnMut(f64, f64) -> f64,
    alpha: f64,
    s: usize,
    f_star: f64,
    iterations: usize,
) -> Vec<f64> {
    let mut c = 0.0;
    let mut out = Vec::with_capacity(iterations);
    for t in 0..iterations {
        let eta = StepSchedule::eta(t);
        let half = forward(c, eta);
        c = backward_step(c, half, eta, alpha, s, f_star);
        out.push(c);
    }
    out
}

/// Correction for one patch after `max_inner` passes (at least one).
///
/// Every tangent-plane anchor of a layer-`j` center lies outside its patch,
/// so adding `c phi` to `u` only raises the center: the forward step at `c_t`
/// is `c_t + shifted_forward_step(.., c_t)`.
pub fn solve_local(u: &PaddedImage, problem: &LocalProblem, set: &TangentPlaneSet, max_inner: usize) -> f64 {
    let mut c = 0.0;
    for t in 0..max_inner.max(1) {
        let half = c + shifted_forward_step(u, problem.center, set, problem.mode, c);
        c = backward_step(c, half, StepSchedule::eta(t), problem.alpha, problem.s, problem.f_star);
    }
    c
}
