//! Executes a [`RunManifest`].

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use curvemg_core::denoise::{denoise_with, ConvergenceTrace, RunHooks, SolverConfig};
use curvemg_core::image::{add_gaussian_noise, gaussian_samples, Image, NoiseSpec};
use curvemg_core::mask::{MaskKind, SamplingMask};
use curvemg_core::metrics::{psnr, ssim, MetricReport};
use curvemg_core::operator::LinearOperator;
use curvemg_core::phantom::{phantom, PhantomKind};
use curvemg_core::radon::{RadonGeometry, RadonOperator};
use curvemg_core::recon::{initial_guess, reconstruct_with};

use crate::error::{Error, Result};
use crate::fourier::MaskedFourier;
use crate::io::{self, MeasurementHeader};
use crate::manifest::{Command, RunManifest};
use crate::report::{write_trace, ReportJson};

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: Option<ReportJson>,
    pub scaling: Vec<ScalingRow>,
    pub converged: bool,
    pub artifacts: Vec<PathBuf>,
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::ThreadPool(e.to_string())),
    }
}

/// Runs the manifest and writes its artifacts into `output_dir`.
pub fn run(manifest: &RunManifest) -> Result<RunOutcome> {
    manifest.validate()?;
    fs::create_dir_all(&manifest.output_dir).map_err(|e| Error::io(&manifest.output_dir, e))?;
    write_text(&manifest.output_dir.join("manifest.json"), &manifest.to_json())?;
    with_threads(manifest.threads, || match manifest.command {
        Command::Denoise => run_denoise(manifest),
        Command::Ct => run_ct(manifest),
        Command::Mri => run_mri(manifest),
        Command::Bench => run_bench(manifest),
    })?
}

fn object(m: &RunManifest) -> Result<Image> {
    match &m.input {
        Some(path) => io::read_image(path),
        None => {
            let kind = PhantomKind::from(m.phantom);
            let img = phantom(kind, m.size)?;
            Ok(if m.command == Command::Denoise {
                img
            } else {
                img.rescaled(m.peak)?
            })
        }
    }
}

struct Finished {
    u: Image,
    trace: ConvergenceTrace,
    reference: Option<Image>,
    baseline_psnr: Option<f64>,
    seconds: f64,
}

fn finish(m: &RunManifest, run: Finished, mut artifacts: Vec<PathBuf>) -> Result<RunOutcome> {
    let out = |name: &str| m.output_dir.join(name);
    io::write_pgm(&out("output.pgm"), &run.u)?;
    io::write_csv_image(&out("output.csv"), &run.u)?;
    write_trace(&out("trace.csv"), &run.trace)?;
    let metrics = MetricReport {
        psnr: run
            .reference
            .as_ref()
            .map(|r| psnr(r, &run.u))
            .transpose()?
            .unwrap_or(f64::NAN),
        ssim: match &run.reference {
            Some(r) => ssim(r, &run.u).unwrap_or(f64::NAN),
            None => f64::NAN,
        },
        energy: run.trace.final_energy(),
        iterations: run.trace.iterations(),
        wall_time: run.seconds,
    };
    let report = ReportJson::new(m.command.name(), &metrics, run.baseline_psnr, &run.trace);
    report.write(&out("report.json"))?;
    artifacts.extend(["output.pgm", "output.csv", "trace.csv", "report.json"].map(out));
    Ok(RunOutcome {
        converged: run.trace.converged,
        report: Some(report),
        scaling: Vec::new(),
        artifacts,
    })
}

fn run_denoise(m: &RunManifest) -> Result<RunOutcome> {
    let (f, reference) = match &m.input {
        Some(path) => (io::read_image(path)?, None),
        None => {
            let clean = object(m)?;
            (
                add_gaussian_noise(&clean, &NoiseSpec::new(m.sigma, m.seed)?),
                Some(clean),
            )
        }
    };
    let noisy_path = m.output_dir.join("noisy.pgm");
    io::write_pgm(&noisy_path, &f)?;
    let start = Instant::now();
    let clock = || start.elapsed().as_secs_f64();
    let hooks = RunHooks {
        reference: reference.as_ref(),
        clock: Some(&clock),
    };
    let (u, trace) = denoise_with(&f, &m.solver_config(), hooks)?;
    let baseline_psnr = reference.as_ref().map(|r| psnr(r, &f)).transpose()?;
    let seconds = clock();
    finish(
        m,
        Finished {
            u,
            trace,
            reference,
            baseline_psnr,
            seconds,
        },
        vec![noisy_path],
    )
}

fn reconstruct_and_finish(
    m: &RunManifest,
    op: &dyn LinearOperator,
    b: &[f64],
    reference: Option<Image>,
    baseline_name: &str,
    mut artifacts: Vec<PathBuf>,
) -> Result<RunOutcome> {
    let cfg = m.recon_config();
    let u0 = initial_guess(b, op, &cfg)?;
    let baseline_path = m.output_dir.join(baseline_name);
    io::write_pgm(&baseline_path, &u0)?;
    artifacts.push(baseline_path);
    let baseline_psnr = reference.as_ref().map(|r| psnr(r, &u0)).transpose()?;
    let start = Instant::now();
    let clock = || start.elapsed().as_secs_f64();
    let hooks = RunHooks {
        reference: reference.as_ref(),
        clock: Some(&clock),
    };
    let (u, trace) = reconstruct_with(b, op, &cfg, hooks)?;
    let seconds = clock();
    finish(
        m,
        Finished {
            u,
            trace,
            reference,
            baseline_psnr,
            seconds,
        },
        artifacts,
    )
}

/// Sinogram noise: `sigma` is relative to the largest measurement.
pub fn add_sinogram_noise(b: &mut [f64], relative_sigma: f64, seed: u64) {
    if relative_sigma == 0.0 {
        return;
    }
    let scale = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let noise = gaussian_samples(b.len(), relative_sigma * scale, seed);
    for (v, n) in b.iter_mut().zip(noise) {
        *v += n;
    }
}

fn run_ct(m: &RunManifest) -> Result<RunOutcome> {
    let sino_path = m.output_dir.join("sinogram.csv");
    if let Some(path) = &m.measurements {
        let (header, b, _) = io::read_measurements(path)?;
        let MeasurementHeader::Sinogram {
            rows,
            cols,
            angles,
            detector_count,
            detector_spacing,
            pixel_size,
            ..
        } = header
        else {
            return Err(Error::Manifest(format!("{} is not a sinogram", path.display())));
        };
        let geometry = RadonGeometry {
            rows,
            cols,
            angles,
            detector_count,
            detector_spacing,
            pixel_size,
        };
        let op = RadonOperator::new(geometry)?;
        let reference = m.input.as_ref().map(|p| io::read_image(p)).transpose()?;
        return reconstruct_and_finish(m, &op, &b, reference, "backprojection.pgm", Vec::new());
    }
    let clean = object(m)?;
    let (rows, cols) = clean.dims();
    let op = RadonOperator::parallel_beam(rows, cols, m.projections)?;
    let mut b = op.forward_image(&clean)?;
    add_sinogram_noise(&mut b, m.sigma, m.seed);
    let g = op.geometry();
    let header = MeasurementHeader::Sinogram {
        rows,
        cols,
        angles: g.angles.clone(),
        detector_count: g.detector_count,
        detector_spacing: g.detector_spacing,
        pixel_size: g.pixel_size,
        noise_sigma: m.sigma,
    };
    io::write_sinogram(&sino_path, &header, &b)?;
    let artifacts = vec![sino_path.clone(), io::sidecar_path(&sino_path)];
    reconstruct_and_finish(m, &op, &b, Some(clean), "backprojection.pgm", artifacts)
}

fn mask_for(m: &RunManifest, rows: usize, cols: usize) -> Result<SamplingMask> {
    let kind = MaskKind::from(m.mask);
    if let Some(path) = &m.mask_file {
        let mask = io::read_mask_pgm(path, kind)?;
        if mask.dims() != (rows, cols) {
            return Err(Error::Manifest(format!(
                "mask {} does not match the {rows}x{cols} image",
                path.display()
            )));
        }
        return Ok(mask);
    }
    Ok(match kind {
        MaskKind::Radial => SamplingMask::radial(rows, cols, m.rate)?,
        MaskKind::Cartesian => SamplingMask::cartesian(rows, cols, m.rate, m.seed)?,
    })
}

fn run_mri(m: &RunManifest) -> Result<RunOutcome> {
    if let Some(path) = &m.measurements {
        let (header, b, freqs) = io::read_measurements(path)?;
        let MeasurementHeader::Kspace { rows, cols, .. } = header else {
            return Err(Error::Manifest(format!("{} is not a k-space file", path.display())));
        };
        let mut data = vec![false; rows * cols];
        for f in freqs {
            let (kr, kc) = (f / cols, f % cols);
            if kr >= rows {
                return Err(Error::Manifest(format!("frequency row {kr} outside {rows}")));
            }
            data[((kr + rows / 2) % rows) * cols + (kc + cols / 2) % cols] = true;
        }
        let mask = SamplingMask::new(MaskKind::from(m.mask), rows, cols, data)?;
        let op = MaskedFourier::new(&mask);
        if op.measurement_len() != b.len() {
            return Err(Error::Manifest("k-space file lists a frequency twice".into()));
        }
        let reference = m.input.as_ref().map(|p| io::read_image(p)).transpose()?;
        return reconstruct_and_finish(m, &op, &b, reference, "zero_filled.pgm", Vec::new());
    }
    let clean = object(m)?;
    let (rows, cols) = clean.dims();
    let mask = mask_for(m, rows, cols)?;
    let op = MaskedFourier::new(&mask);
    let mut b = op.forward_image(&clean)?;
    if m.sigma > 0.0 {
        for (v, n) in b
            .iter_mut()
            .zip(gaussian_samples(op.measurement_len(), m.sigma, m.seed))
        {
            *v += n;
        }
    }
    let kspace_path = m.output_dir.join("kspace.csv");
    let mask_path = m.output_dir.join("mask.pgm");
    let header = MeasurementHeader::Kspace {
        rows,
        cols,
        mask: mask.kind().name().into(),
        rate: mask.rate(),
        seed: m.seed,
        noise_sigma: m.sigma,
    };
    io::write_kspace(&kspace_path, &header, op.sampled_frequencies(), &b)?;
    io::write_mask_pgm(&mask_path, &mask)?;
    let artifacts = vec![kspace_path.clone(), io::sidecar_path(&kspace_path), mask_path];
    reconstruct_and_finish(m, &op, &b, Some(clean), "zero_filled.pgm", artifacts)
}

/// One size of a scaling sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub size: usize,
    pub pixels: usize,
    pub iterations: usize,
    pub seconds: f64,
    /// Wall time relative to the previous size.
    pub cpu_ratio: Option<f64>,
    /// Outer iterations of the same run with a single layer.
    pub single_layer_iterations: Option<usize>,
}

/// Denoises a noisy phantom at each size with `cfg`, timing every run.
/// With `compare_layers` each size is also run with one layer.
pub fn bench_scaling(
    sizes: &[usize],
    cfg: &SolverConfig,
    kind: PhantomKind,
    noise: NoiseSpec,
    compare_layers: bool,
) -> Result<Vec<ScalingRow>> {
    if sizes.len() < 2 {
        return Err(Error::Manifest("bench needs at least two sizes".into()));
    }
    let mut rows: Vec<ScalingRow> = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let f = add_gaussian_noise(&phantom(kind, size)?, &noise);
        let start = Instant::now();
        let (_, trace) = curvemg_core::denoise(&f, cfg)?;
        let seconds = start.elapsed().as_secs_f64();
        let single_layer_iterations = if compare_layers {
            let one = SolverConfig { layers: 1, ..*cfg };
            Some(curvemg_core::denoise(&f, &one)?.1.iterations())
        } else {
            None
        };
        rows.push(ScalingRow {
            size,
            pixels: f.len(),
            iterations: trace.iterations(),
            seconds,
            cpu_ratio: rows.last().map(|p| seconds / p.seconds),
            single_layer_iterations,
        });
    }
    Ok(rows)
}

pub fn scaling_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from("size,pixels,iterations,seconds,cpu_ratio,single_layer_iterations\n");
    for r in rows {
        let ratio = r.cpu_ratio.map(|v| format!("{v:.4}")).unwrap_or_default();
        let single = r.single_layer_iterations.map(|v| v.to_string()).unwrap_or_default();
        out += &format!(
            "{},{},{},{:.6},{},{}\n",
            r.size, r.pixels, r.iterations, r.seconds, ratio, single
        );
    }
    out
}

fn run_bench(m: &RunManifest) -> Result<RunOutcome> {
    let rows = bench_scaling(
        &m.sizes,
        &m.solver_config(),
        m.phantom.into(),
        NoiseSpec::new(m.sigma, m.seed)?,
        m.layers > 1,
    )?;
    let path = m.output_dir.join("bench.csv");
    write_text(&path, &scaling_csv(&rows))?;
    Ok(RunOutcome {
        report: None,
        scaling: rows,
        converged: true,
        artifacts: vec![path],
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
