use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use curvemg::manifest::{Command, Mask, Mode, Phantom, RunManifest, Stop};

#[derive(Parser)]
#[command(
    name = "curvemg",
    version,
    about = "Multi-grid curvature minimization: denoising, CT and MRI"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Denoise a noisy phantom or an input image.
    Denoise(Overrides),
    /// Parallel-beam CT reconstruction.
    Ct(Overrides),
    /// Undersampled Fourier (MRI) reconstruction.
    Mri(Overrides),
    /// Wall time and iteration counts across image sizes.
    Bench(Overrides),
}

/// Every flag overrides the matching manifest key.
#[derive(Args)]
struct Overrides {
    /// JSON manifest to start from (command defaults otherwise).
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, short)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    measurements: Option<PathBuf>,
    #[arg(long)]
    mask_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    phantom: Option<Phantom>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    peak: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long)]
    inner_iters: Option<usize>,
    #[arg(long, value_enum)]
    stop: Option<Stop>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    projections: Option<usize>,
    #[arg(long, value_enum)]
    mask: Option<Mask>,
    #[arg(long)]
    rate: Option<f64>,
    /// Solver threads (default: all cores).
    #[arg(long, env = "CURVEMG_THREADS")]
    threads: Option<usize>,
    /// Comma-separated sizes for `bench`.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    full_vcycle: bool,
    #[arg(long)]
    clip: bool,
}

macro_rules! apply {
    ($m:ident, $o:ident, $($field:ident),*) => {
        $(if let Some(v) = $o.$field { $m.$field = v; })*
    };
}

fn manifest(command: Command, o: Overrides) -> anyhow::Result<RunManifest> {
    let mut m = match &o.manifest {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let m = RunManifest::from_json(&text)?;
            anyhow::ensure!(
                m.command == command,
                "manifest is for `{}`, not `{}`",
                m.command.name(),
                command.name()
            );
            m
        }
        None => RunManifest::for_command(command),
    };
    apply!(
        m,
        o,
        output_dir,
        phantom,
        size,
        peak,
        alpha,
        mode,
        layers,
        epsilon,
        max_outer,
        inner_iters,
        stop,
        seed,
        sigma,
        projections,
        mask,
        rate,
        sizes
    );
    if o.input.is_some() {
        m.input = o.input;
    }
    if o.measurements.is_some() {
        m.measurements = o.measurements;
    }
    if o.mask_file.is_some() {
        m.mask_file = o.mask_file;
    }
    if o.threads.is_some() {
        m.threads = o.threads;
    }
    m.full_vcycle |= o.full_vcycle;
    m.clip |= o.clip;
    m.validate()?;
    Ok(m)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, overrides) = match cli.command {
        Sub::Denoise(o) => (Command::Denoise, o),
        Sub::Ct(o) => (Command::Ct, o),
        Sub::Mri(o) => (Command::Mri, o),
        Sub::Bench(o) => (Command::Bench, o),
    };
    let result = manifest(command, overrides).and_then(|m| Ok((curvemg::run(&m)?, m)));
    match result {
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Ok((outcome, m)) => {
            if let Some(r) = &outcome.report {
                let db = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2} dB"));
                println!(
                    "{}: {} iterations, energy {:.6e}, psnr {} (start {}), {:.2} s",
                    m.command.name(),
                    r.iterations,
                    r.energy,
                    db(r.psnr),
                    db(r.baseline_psnr),
                    r.wall_time
                );
            }
            for row in &outcome.scaling {
                let ratio = row.cpu_ratio.map_or("-".into(), |v| format!("{v:.2}"));
                let single = row.single_layer_iterations.map_or("-".into(), |v| v.to_string());
                println!(
                    "{:>5}: {:>5} iterations ({} with one layer), {:.3} s, ratio {ratio}",
                    row.size, row.iterations, single, row.seconds
                );
            }
            println!("artifacts in {}", m.output_dir.display());
            if outcome.converged {
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "warning: stopping tolerance {} not reached within {} outer iterations",
                    m.epsilon, m.max_outer
                );
                ExitCode::from(2)
            }
        }
    }
}
