//! Outer multi-grid driver for denoising.
//!
//! One outer iteration sweeps the layers fine to coarse (optionally back up
//! again). Within a layer the four color classes are visited in order; every
//! patch of the class solves its local problem against a snapshot of `u`
//! taken at the start of the class, then all corrections are added at once.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fbs::{solve_local, CurvatureMode, LocalProblem};
use crate::geometry::{normalized_energy, TangentPlaneSet};
use crate::grid::{apply_corrections, build_hierarchy, color, restrict_fidelity, ColorClasses, Partition};
use crate::image::{Boundary, Image, PaddedImage};
use crate::metrics::psnr;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopRule {
    /// Relative change of the objective.
    #[default]
    RelEnergy,
    /// Relative L1 change of `u`.
    RelU,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub alpha: f64,
    pub mode: CurvatureMode,
    pub layers: usize,
    pub epsilon: f64,
    pub max_outer: usize,
    /// FBS passes per local problem.
    pub inner_iters: usize,
    pub stop_rule: StopRule,
    /// Sweep back up the layers after the fine-to-coarse pass.
    pub full_vcycle: bool,
    /// Clamp `u` to `[0, peak]` after every outer iteration.
    pub clip: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 0.06,
            mode: CurvatureMode::Mean,
            layers: 3,
            epsilon: 1e-6,
            max_outer: 1000,
            inner_iters: 1,
            stop_rule: StopRule::RelEnergy,
            full_vcycle: false,
            clip: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(alloc::format!("alpha must be positive, got {}", self.alpha));
        }
        if !(1..=crate::geometry::MAX_LAYERS).contains(&self.layers) {
            return Err(Error::LayerOutOfRange(self.layers));
        }
        if !(self.epsilon > 0.0) {
            return bad(alloc::format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.max_outer == 0 {
            return bad("max_outer must be at least 1".into());
        }
        if self.inner_iters == 0 {
            return bad("inner_iters must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub energy: f64,
    pub rel_energy: f64,
    pub rel_u: f64,
    pub seconds: f64,
    pub psnr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTrace {
    /// Objective at the initial guess.
    pub initial_energy: f64,
    pub records: Vec<TraceRecord>,
    /// The stopping rule fired before `max_outer`.
    pub converged: bool,
}

impl ConvergenceTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_energy(&self) -> f64 {
        self.records.last().map_or(self.initial_energy, |r| r.energy)
    }

    /// Fraction of outer iterations that did not increase the objective.
    pub fn decrease_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 1.0;
        }
        let mut prev = self.initial_energy;
        let mut ok = 0usize;
        for r in &self.records {
            if r.energy <= prev {
                ok += 1;
            }
            prev = r.energy;
        }
        ok as f64 / self.records.len() as f64
    }
}

/// `|F_new - F_old| / |F_new|`, or `|F_old|` when `F_new == 0`.
pub fn rel_err_energy(f_new: f64, f_old: f64) -> f64 {
    if f_new == 0.0 {
        f_old.abs()
    } else {
        (f_new - f_old).abs() / f_new.abs()
    }
}

/// `||u_new - u_old||_1 / ||u_new||_1`.
pub fn rel_err_u(u_new: &Image, u_old: &Image) -> Result<f64> {
    u_new.ensure_same_dims(u_old)?;
    let norm = u_new.l1_norm();
    if norm == 0.0 {
        return Err(Error::InvalidImage("relative change of a zero image".into()));
    }
    Ok(l1_diff(u_new, u_old) / norm)
}

fn l1_diff(a: &Image, b: &Image) -> f64 {
    let (x, y) = (a.data(), b.data());
    par::sum_indexed(x.len(), |i| (x[i] - y[i]).abs())
}

// Driver-side rel_u that tolerates an all-zero iterate.
pub(crate) fn rel_change(u_new: &Image, u_old: &Image) -> f64 {
    let diff = l1_diff(u_new, u_old);
    let norm = u_new.l1_norm();
    if diff == 0.0 {
        0.0
    } else if norm == 0.0 {
        f64::INFINITY
    } else {
        diff / norm
    }
}

/// Partitions, colorings and plane sets of layers `1..=J`.
#[derive(Debug, Clone)]
pub(crate) struct Hierarchy {
    pub partitions: Vec<Partition>,
    pub colors: Vec<ColorClasses>,
    pub sets: Vec<TangentPlaneSet>,
    pub margin: usize,
}

impl Hierarchy {
    pub fn new(rows: usize, cols: usize, layers: usize) -> Result<Self> {
        let partitions = build_hierarchy(rows, cols, layers)?;
        let colors = partitions.iter().map(color).collect();
        let sets = (1..=layers).map(TangentPlaneSet::new).collect::<Result<Vec<_>>>()?;
        let margin = partitions.iter().map(Partition::required_margin).max().unwrap_or(1);
        Ok(Self {
            partitions,
            colors,
            sets,
            margin,
        })
    }

    /// Layer indices visited by one outer iteration.
    pub fn schedule(&self, full_vcycle: bool) -> Vec<usize> {
        let n = self.partitions.len();
        let mut order: Vec<usize> = (0..n).collect();
        if full_vcycle {
            order.extend((0..n.saturating_sub(1)).rev());
        }
        order
    }
}

/// Optional observers for a run.
#[derive(Clone, Copy, Default)]
pub struct RunHooks<'a> {
    /// Clean image for per-iteration PSNR.
    pub reference: Option<&'a Image>,
    /// Monotone clock in seconds.
    pub clock: Option<&'a dyn Fn() -> f64>,
}

impl RunHooks<'_> {
    pub(crate) fn now(&self) -> f64 {
        self.clock.map_or(0.0, |c| c())
    }

    pub(crate) fn psnr(&self, u: &Image) -> Result<Option<f64>> {
        self.reference.map(|r| psnr(r, u)).transpose()
    }
}

/// Denoises `f` with [`SolverConfig`], starting from `u_0 = f`.
pub fn denoise(f: &Image, cfg: &SolverConfig) -> Result<(Image, ConvergenceTrace)> {
    #[cfg(feature = "std")]
    {
        let start = std::time::Instant::now();
        let clock = move || start.elapsed().as_secs_f64();
        denoise_with(
            f,
            cfg,
            RunHooks {
                reference: None,
                clock: Some(&clock),
            },
        )
    }
    #[cfg(not(feature = "std"))]
    {
        denoise_with(f, cfg, RunHooks::default())
    }
}

pub fn denoise_with(f: &Image, cfg: &SolverConfig, hooks: RunHooks<'_>) -> Result<(Image, ConvergenceTrace)> {
    cfg.validate()?;
    let (rows, cols) = f.dims();
    let hierarchy = Hierarchy::new(rows, cols, cfg.layers)?;
    let schedule = hierarchy.schedule(cfg.full_vcycle);
    let f_view = PaddedImage::new(f, 0, Boundary::PointReflect);
    let t0 = hooks.now();

    let mut u = f.clone();
    let mut snapshot = PaddedImage::new(&u, hierarchy.margin, Boundary::PointReflect);
    let mut f_old = normalized_energy(&u, f, cfg.alpha, cfg.mode)?;
    let mut trace = ConvergenceTrace {
        initial_energy: f_old,
        records: Vec::new(),
        converged: false,
    };

    for iteration in 1..=cfg.max_outer {
        let u_old = u.clone();
        for &layer in &schedule {
            let partition = &hierarchy.partitions[layer];
            let set = &hierarchy.sets[layer];
            for class in hierarchy.colors[layer].iter() {
                if class.is_empty() {
                    continue;
                }
                snapshot.refresh(&u);
                let snap = &snapshot;
                let corrections = par::map_slice(class, |&i| -> Result<(usize, f64)> {
                    let rect = partition.patch_rect(i).clipped(rows, cols);
                    let (f_star, s) = restrict_fidelity(&f_view, snap, &rect)?;
                    let problem = LocalProblem {
                        center: partition.patch_center(i),
                        f_star,
                        s,
                        alpha: cfg.alpha,
                        mode: cfg.mode,
                    };
                    Ok((i, solve_local(snap, &problem, set, cfg.inner_iters)))
                })
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
                apply_corrections(&mut u, partition, &corrections);
            }
        }
        if cfg.clip {
            u = u.clamp(0.0, u.peak());
        }

        let f_new = normalized_energy(&u, f, cfg.alpha, cfg.mode)?;
        if !f_new.is_finite() {
            return Err(Error::Diverged { iteration });
        }
        let rel_energy = rel_err_energy(f_new, f_old);
        let rel_u = rel_change(&u, &u_old);
        trace.records.push(TraceRecord {
            iteration,
            energy: f_new,
            rel_energy,
            rel_u,
            seconds: hooks.now() - t0,
            psnr: hooks.psnr(&u)?,
        });
        f_old = f_new;
        let measure = match cfg.stop_rule {
            StopRule::RelEnergy => rel_energy,
            StopRule::RelU => rel_u,
        };
        if measure <= cfg.epsilon {
            trace.converged = true;
            break;
        }
    }
    Ok((u, trace))
}
