//! Multi-grid reconstruction for `b = A u + noise`, minimizing
//!
//! ```text
//! F(u) = 1/2 ||A u - b||^2 + alpha sum |H(u)|
//! ```
//!
//! Each (layer, color) step replaces `|H|` near the current iterate by the
//! quadratic `sum_i (c_i - d_i)^2`, `d_i` the mean plane distance at patch
//! `i`, and solves the coupled system
//!
//! ```text
//! (G + 2 alpha I) c = r,   G_ik = <A phi_i, A phi_k>,
//! r_i = <b - A u, A phi_i> + 2 alpha d_i
//! ```
//!
//! by conjugate gradients, with `G` applied matrix-free.

use alloc::vec;
use alloc::vec::Vec;

use crate::denoise::{
    rel_change, rel_err_energy, ConvergenceTrace, Hierarchy, RunHooks, SolverConfig, StopRule, TraceRecord,
};
use crate::error::{Error, Result};
use crate::fbs::CurvatureMode;
use crate::geometry::{curvature_total, mean_distance, TangentPlaneSet};
use crate::grid::Partition;
use crate::image::{Boundary, Image, PaddedImage};
use crate::operator::{operator_norm_sq, LinearOperator};
use crate::par;

/// Default conjugate-gradient iteration cap per color.
pub const CG_MAX_ITER: usize = 10;
/// Default relative residual tolerance.
pub const CG_TOL: f64 = 1e-8;
/// Default relative-energy tolerance for reconstruction.
pub const RECON_EPSILON: f64 = 1e-4;

/// Initial guess.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Init {
    /// `A^T b / ||A||^2`, with `||A||^2` from power iteration.
    #[default]
    NormalizedAdjoint,
    /// `A^T b`.
    Adjoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconConfig {
    /// Outer-loop settings; `mode` must be [`CurvatureMode::Mean`].
    pub solver: SolverConfig,
    pub cg_max_iter: usize,
    pub cg_tol: f64,
    pub init: Init,
    pub power_iterations: usize,
    /// Peak attached to the returned image.
    pub peak: f64,
}

impl Default for ReconConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig {
                alpha: 5e-3,
                epsilon: RECON_EPSILON,
                max_outer: 200,
                ..SolverConfig::default()
            },
            cg_max_iter: CG_MAX_ITER,
            cg_tol: CG_TOL,
            init: Init::NormalizedAdjoint,
            power_iterations: 20,
            peak: 1.0,
        }
    }
}

impl ReconConfig {
    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.solver.mode != CurvatureMode::Mean {
            return Err(Error::InvalidConfig(
                "reconstruction supports the mean curvature prior only".into(),
            ));
        }
        if self.cg_max_iter == 0 {
            return Err(Error::InvalidConfig("cg_max_iter must be at least 1".into()));
        }
        if !(self.cg_tol >= 0.0) {
            return Err(Error::InvalidConfig("cg_tol must be non-negative".into()));
        }
        if !(self.peak > 0.0 && self.peak.is_finite()) {
            return Err(Error::InvalidConfig("peak must be positive".into()));
        }
        Ok(())
    }
}

/// Result of [`cg_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `||r_k||` for `k = 0..=iterations`.
    pub residual_norms: Vec<f64>,
}

/// Conjugate gradients for an SPD operator from `x_0 = 0`, stopping after
/// `max_iter` steps or once `||r_k|| <= tol ||r_0||`.
pub fn cg_solve(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    rhs: &[f64],
    max_iter: usize,
    tol: f64,
) -> Result<CgOutcome> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = par::dot(&r, &r);
    let r0 = residual_norm(rr, 0)?;
    let mut norms = vec![r0];
    let mut iterations = 0;
    while iterations < max_iter && norms[iterations] > tol * r0 && rr > 0.0 {
        apply(&p, &mut ap);
        let pap = par::dot(&p, &ap);
        if !(pap > 0.0 && pap.is_finite()) {
            return Err(Error::CgBreakdown {
                iteration: iterations + 1,
            });
        }
        let step = rr / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let rr_new = par::dot(&r, &r);
        iterations += 1;
        norms.push(residual_norm(rr_new, iterations)?);
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Ok(CgOutcome {
        solution: x,
        iterations,
        residual_norms: norms,
    })
}

fn residual_norm(rr: f64, iteration: usize) -> Result<f64> {
    if rr.is_finite() {
        Ok(crate::math::sqrt(rr))
    } else {
        Err(Error::CgBreakdown { iteration })
    }
}

/// Sum of `v` over each listed patch, clipped to the image.
pub fn patch_sums(v: &[f64], partition: &Partition, patches: &[usize]) -> Vec<f64> {
    let (rows, cols) = partition.image_dims();
    par::map_slice(patches, |&i| {
        let rect = partition.patch_rect(i).clipped(rows, cols);
        let mut acc = 0.0;
        for r in rect.top..rect.top + rect.height {
            for x in &v[r * cols + rect.left..r * cols + rect.left + rect.width] {
                acc += x;
            }
        }
        acc
    })
}

/// `sum_i c_i phi_i` over the listed patches as a row-major image vector.
pub fn prolongate_patches(c: &[f64], partition: &Partition, patches: &[usize]) -> Vec<f64> {
    let (rows, cols) = partition.image_dims();
    let mut out = vec![0.0; rows * cols];
    for (&i, &value) in patches.iter().zip(c) {
        let rect = partition.patch_rect(i).clipped(rows, cols);
        for r in rect.top..rect.top + rect.height {
            out[r * cols + rect.left..r * cols + rect.left + rect.width].fill(value);
        }
    }
    out
}

/// The per-color system `(G + 2 alpha I) c = r`.
pub struct ColorSystem<'a> {
    op: &'a dyn LinearOperator,
    partition: &'a Partition,
    patches: &'a [usize],
    alpha: f64,
}

impl<'a> ColorSystem<'a> {
    pub fn new(op: &'a dyn LinearOperator, partition: &'a Partition, patches: &'a [usize], alpha: f64) -> Self {
        Self {
            op,
            partition,
            patches,
            alpha,
        }
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    /// `out = Phi^T A^T A Phi c + 2 alpha c`.
    pub fn apply(&self, c: &[f64], out: &mut [f64]) {
        let v = prolongate_patches(c, self.partition, self.patches);
        let w = self.op.apply_adjoint(&self.op.apply(&v));
        let sums = patch_sums(&w, self.partition, self.patches);
        for ((o, s), ci) in out.iter_mut().zip(sums).zip(c) {
            *o = s + 2.0 * self.alpha * ci;
        }
    }

    pub fn solve(&self, rhs: &[f64], max_iter: usize, tol: f64) -> Result<CgOutcome> {
        cg_solve(|x, y| self.apply(x, y), rhs, max_iter, tol)
    }
}

/// `r_i = <b - A u, A phi_i> + 2 alpha d_i` for the listed patches.
pub fn assemble_color_rhs(
    u: &[f64],
    b: &[f64],
    op: &dyn LinearOperator,
    partition: &Partition,
    patches: &[usize],
    alpha: f64,
    d: &[f64],
) -> Vec<f64> {
    assert_eq!(d.len(), patches.len(), "one mean correction per patch");
    let au = op.apply(u);
    let residual: Vec<f64> = b.iter().zip(&au).map(|(b, a)| b - a).collect();
    let g = op.apply_adjoint(&residual);
    patch_sums(&g, partition, patches)
        .into_iter()
        .zip(d)
        .map(|(s, d)| s + 2.0 * alpha * d)
        .collect()
}

/// Mean plane distances at the centers of the listed patches.
pub fn patch_mean_distances(
    u: &PaddedImage,
    partition: &Partition,
    set: &TangentPlaneSet,
    patches: &[usize],
) -> Vec<f64> {
    par::map_slice(patches, |&i| mean_distance(u, partition.patch_center(i), set))
}

/// `1/2 ||A u - b||^2 + alpha sum |H(u)|`.
pub fn objective(u: &Image, b: &[f64], op: &dyn LinearOperator, alpha: f64) -> Result<f64> {
    let au = op.forward_image(u)?;
    if au.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: (op.measurement_len(), 1),
            found: (b.len(), 1),
        });
    }
    let misfit = par::sum_indexed(b.len(), |i| (au[i] - b[i]) * (au[i] - b[i]));
    Ok(0.5 * misfit + alpha * curvature_total(u, CurvatureMode::Mean))
}

/// Initial guess for `cfg.init`.
pub fn initial_guess(b: &[f64], op: &dyn LinearOperator, cfg: &ReconConfig) -> Result<Image> {
    let mut u = op.adjoint_image(b, cfg.peak)?;
    if cfg.init == Init::NormalizedAdjoint {
        let scale = operator_norm_sq(op, cfg.power_iterations)?;
        u = u.map(|v| v / scale)?;
    }
    Ok(u)
}

/// Reconstructs `u` from `b = A u + noise`.
pub fn reconstruct(b: &[f64], op: &dyn LinearOperator, cfg: &ReconConfig) -> Result<(Image, ConvergenceTrace)> {
    #[cfg(feature = "std")]
    {
        let start = std::time::Instant::now();
        let clock = move || start.elapsed().as_secs_f64();
        reconstruct_with(
            b,
            op,
            cfg,
            RunHooks {
                reference: None,
                clock: Some(&clock),
            },
        )
    }
    #[cfg(not(feature = "std"))]
    reconstruct_with(b, op, cfg, RunHooks::default())
}

pub fn reconstruct_with(
    b: &[f64],
    op: &dyn LinearOperator,
    cfg: &ReconConfig,
    hooks: RunHooks<'_>,
) -> Result<(Image, ConvergenceTrace)> {
    cfg.validate()?;
    if b.len() != op.measurement_len() {
        return Err(Error::DimensionMismatch {
            expected: (op.measurement_len(), 1),
            found: (b.len(), 1),
        });
    }
    let scfg = &cfg.solver;
    let (rows, cols) = op.image_dims();
    let hierarchy = Hierarchy::new(rows, cols, scfg.layers)?;
    let schedule = hierarchy.schedule(scfg.full_vcycle);
    let t0 = hooks.now();

    let mut u = initial_guess(b, op, cfg)?;
    let mut snapshot = PaddedImage::new(&u, hierarchy.margin, Boundary::PointReflect);
    let mut f_old = objective(&u, b, op, scfg.alpha)?;
    let mut trace = ConvergenceTrace {
        initial_energy: f_old,
        records: Vec::new(),
        converged: false,
    };

    for iteration in 1..=scfg.max_outer {
        let u_old = u.clone();
        for &layer in &schedule {
            let partition = &hierarchy.partitions[layer];
            let set = &hierarchy.sets[layer];
            for class in hierarchy.colors[layer].iter() {
                if class.is_empty() {
                    continue;
                }
                snapshot.refresh(&u);
                let d = patch_mean_distances(&snapshot, partition, set, class);
                let rhs = assemble_color_rhs(u.data(), b, op, partition, class, scfg.alpha, &d);
                let system = ColorSystem::new(op, partition, class, scfg.alpha);
                let outcome = system.solve(&rhs, cfg.cg_max_iter, cfg.cg_tol)?;
                let delta = prolongate_patches(&outcome.solution, partition, class);
                for (v, dv) in u.data_mut().iter_mut().zip(&delta) {
                    *v += dv;
                }
            }
        }
        if scfg.clip {
            u = u.clamp(0.0, u.peak());
        }

        let f_new = objective(&u, b, op, scfg.alpha)?;
        if !f_new.is_finite() || u.data().iter().any(|v| !v.is_finite()) {
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
        let measure = match scfg.stop_rule {
            StopRule::RelEnergy => rel_energy,
            StopRule::RelU => rel_u,
        };
        if measure <= scfg.epsilon {
            trace.converged = true;
            break;
        }
    }
    Ok((u, trace))
}
