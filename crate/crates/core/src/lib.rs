//! Multi-grid minimization of mean- and Gaussian-curvature energies.
//!
//! The crate is `no_std` + `alloc`. Enable the `std` feature for the std math
//! intrinsics, and `parallel` (default) to run the patch solves of one color
//! class on the rayon pool. Results are bitwise independent of the thread
//! count: corrections of one color class are computed from a snapshot and
//! written to disjoint pixel rectangles, and every reduction runs in a fixed
//! order.
//!
//! Module map:
//!
//! * [`image`], [`metrics`], [`phantom`]: the image container, boundary
//!   extensions, noise, PSNR/SSIM and analytic test images.
//! * [`geometry`]: tangent-plane enumeration, plane distances, normal
//!   curvatures and the discrete energy.
//! * [`grid`]: dyadic patch partitions, the four-coloring, restriction and
//!   piecewise-constant prolongation.
//! * [`fbs`]: the per-patch forward-backward splitting solver.
//! * [`denoise`]: the outer multi-grid driver for denoising.
//! * [`operator`], [`radon`], [`mask`], [`recon`]: linear forward models and
//!   the reconstruction driver built on per-color conjugate gradients.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod denoise;
pub mod error;
pub mod fbs;
pub mod geometry;
pub mod grid;
pub mod image;
pub mod mask;
pub(crate) mod math;
pub mod metrics;
pub mod operator;
pub(crate) mod par;
pub mod phantom;
pub mod radon;
pub mod recon;

pub use denoise::{denoise, ConvergenceTrace, SolverConfig, StopRule, TraceRecord};
pub use error::{Error, Result};
pub use fbs::CurvatureMode;
pub use geometry::{TangentPlaneSet, MAX_LAYERS};
pub use image::{Image, NoiseSpec};
pub use metrics::{psnr, ssim, MetricReport};
pub use operator::LinearOperator;
