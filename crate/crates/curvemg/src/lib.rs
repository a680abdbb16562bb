//! Command-line harness and file formats for `curvemg-core`.
//!
//! * [`io`]: PGM (8/16-bit) images and masks, CSV images with a JSON sidecar,
//!   sinogram and k-space CSVs with a JSON header.
//! * [`fourier`]: the undersampled unitary Fourier operator.
//! * [`manifest`]: flat JSON run manifests with per-command defaults.
//! * [`report`]: the versioned trace CSV and the JSON run report.
//! * [`run`]: manifest execution and the scaling benchmark.

pub use curvemg_core;

pub mod error;
pub mod fourier;
pub mod io;
pub mod manifest;
pub mod report;
pub mod run;

pub use error::{Error, Result};
pub use manifest::{Command, RunManifest};
pub use run::{bench_scaling, run, RunOutcome};
