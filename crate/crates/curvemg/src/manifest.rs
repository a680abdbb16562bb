//! Flat JSON run manifests.
//!
//! Keys missing from a manifest file take the defaults of its `command`, so
//! `{"command": "ct"}` is a complete manifest.

use std::path::PathBuf;

use curvemg_core::denoise::{SolverConfig, StopRule};
use curvemg_core::fbs::CurvatureMode;
use curvemg_core::mask::MaskKind;
use curvemg_core::phantom::PhantomKind;
use curvemg_core::recon::{Init, ReconConfig, CG_MAX_ITER, CG_TOL};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Denoise,
    Ct,
    Mri,
    Bench,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Denoise => "denoise",
            Command::Ct => "ct",
            Command::Mri => "mri",
            Command::Bench => "bench",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Mean,
    Gaussian,
}

impl From<Mode> for CurvatureMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Mean => CurvatureMode::Mean,
            Mode::Gaussian => CurvatureMode::Gaussian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Stop {
    Energy,
    U,
}

impl From<Stop> for StopRule {
    fn from(s: Stop) -> Self {
        match s {
            Stop::Energy => StopRule::RelEnergy,
            Stop::U => StopRule::RelU,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mask {
    Cartesian,
    Radial,
}

impl From<Mask> for MaskKind {
    fn from(m: Mask) -> Self {
        match m {
            Mask::Cartesian => MaskKind::Cartesian,
            Mask::Radial => MaskKind::Radial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Phantom {
    SheppLogan,
    Triangle,
    Shapes,
}

impl From<Phantom> for PhantomKind {
    fn from(p: Phantom) -> Self {
        match p {
            Phantom::SheppLogan => PhantomKind::SheppLogan,
            Phantom::Triangle => PhantomKind::Triangle,
            Phantom::Shapes => PhantomKind::Shapes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: Command,
    /// Image to process instead of a phantom. For `denoise` it is the noisy
    /// observation; for `ct`/`mri` it is the object the measurements are
    /// simulated from.
    pub input: Option<PathBuf>,
    /// Existing sinogram or k-space CSV (with its JSON header) to reconstruct
    /// from instead of simulating.
    pub measurements: Option<PathBuf>,
    /// Centered sampling mask PGM used instead of generating one.
    pub mask_file: Option<PathBuf>,
    pub phantom: Phantom,
    pub size: usize,
    /// Intensity peak the phantom is scaled to.
    pub peak: f64,
    pub output_dir: PathBuf,
    pub alpha: f64,
    pub mode: Mode,
    pub layers: usize,
    pub epsilon: f64,
    pub max_outer: usize,
    pub inner_iters: usize,
    pub stop: Stop,
    pub full_vcycle: bool,
    pub clip: bool,
    /// Noise level: absolute for `denoise`/`mri` (per real component in
    /// k-space), relative to the largest sinogram value for `ct`.
    pub sigma: f64,
    pub seed: u64,
    pub projections: usize,
    pub mask: Mask,
    pub rate: f64,
    pub threads: Option<usize>,
    /// Image sizes for `bench`.
    pub sizes: Vec<usize>,
}

impl RunManifest {
    pub fn for_command(command: Command) -> Self {
        let solver = SolverConfig::default();
        let mut m = Self {
            command,
            input: None,
            measurements: None,
            mask_file: None,
            phantom: Phantom::Triangle,
            size: 128,
            peak: 255.0,
            output_dir: PathBuf::from("out"),
            alpha: solver.alpha,
            mode: Mode::Mean,
            layers: solver.layers,
            epsilon: solver.epsilon,
            max_outer: solver.max_outer,
            inner_iters: solver.inner_iters,
            stop: Stop::Energy,
            full_vcycle: false,
            clip: false,
            sigma: 10.0,
            seed: 1,
            projections: 36,
            mask: Mask::Radial,
            rate: 0.1265,
            threads: None,
            sizes: vec![128, 256, 512],
        };
        match command {
            Command::Denoise | Command::Bench => {}
            Command::Ct => {
                let recon = ReconConfig::default();
                m.phantom = Phantom::SheppLogan;
                m.alpha = recon.solver.alpha;
                m.epsilon = recon.solver.epsilon;
                m.max_outer = recon.solver.max_outer;
                m.sigma = 0.0;
            }
            Command::Mri => {
                m.phantom = Phantom::SheppLogan;
                m.alpha = 0.3;
                m.epsilon = 1e-6;
                m.max_outer = 600;
            }
        }
        m
    }

    /// Parses a manifest, filling missing keys from the command defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let bad = |e: serde_json::Error| Error::Manifest(e.to_string());
        let given: serde_json::Value = serde_json::from_str(text).map_err(bad)?;
        let serde_json::Value::Object(given) = given else {
            return Err(Error::Manifest("top level must be an object".into()));
        };
        let command: Command = serde_json::from_value(
            given
                .get("command")
                .cloned()
                .ok_or_else(|| Error::Manifest("missing `command`".into()))?,
        )
        .map_err(bad)?;
        let mut merged = serde_json::to_value(Self::for_command(command)).map_err(bad)?;
        let serde_json::Value::Object(fields) = &mut merged else {
            unreachable!("manifest serializes to an object")
        };
        fields.extend(given);
        let m: Self = serde_json::from_value(merged).map_err(bad)?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            alpha: self.alpha,
            mode: self.mode.into(),
            layers: self.layers,
            epsilon: self.epsilon,
            max_outer: self.max_outer,
            inner_iters: self.inner_iters,
            stop_rule: self.stop.into(),
            full_vcycle: self.full_vcycle,
            clip: self.clip,
        }
    }

    pub fn recon_config(&self) -> ReconConfig {
        ReconConfig {
            solver: self.solver_config(),
            cg_max_iter: CG_MAX_ITER,
            cg_tol: CG_TOL,
            init: match self.command {
                Command::Mri => Init::Adjoint,
                _ => Init::NormalizedAdjoint,
            },
            power_iterations: 20,
            peak: self.peak,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.solver_config().validate()?;
        let fail = |m: &str| Err(Error::Manifest(m.into()));
        if matches!(self.command, Command::Ct | Command::Mri) {
            self.recon_config().validate()?;
        }
        if !(self.peak > 0.0 && self.peak.is_finite()) {
            return fail("peak must be positive");
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return fail("sigma must be non-negative");
        }
        if self.projections == 0 {
            return fail("projections must be positive");
        }
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return fail("rate must lie in (0, 1]");
        }
        if self.threads == Some(0) {
            return fail("threads must be positive");
        }
        if self.command == Command::Bench && self.sizes.len() < 2 {
            return fail("bench needs at least two sizes");
        }
        Ok(())
    }
}
