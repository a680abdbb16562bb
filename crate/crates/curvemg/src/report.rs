//! Trace CSV and run report JSON.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use curvemg_core::denoise::ConvergenceTrace;
use curvemg_core::metrics::MetricReport;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// First line of every trace file.
pub const TRACE_SCHEMA: &str = "# curvemg-trace v1";
pub const TRACE_COLUMNS: &str = "iter,energy,rel_energy,rel_u,seconds,psnr";

fn number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Renders the trace; the psnr column is empty when no reference was given.
pub fn trace_csv(trace: &ConvergenceTrace) -> String {
    let mut out = format!("{TRACE_SCHEMA}\n{TRACE_COLUMNS}\n");
    for r in &trace.records {
        let psnr = r.psnr.map(number).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.iteration,
            number(r.energy),
            number(r.rel_energy),
            number(r.rel_u),
            number(r.seconds),
            psnr
        );
    }
    out
}

pub fn write_trace(path: &Path, trace: &ConvergenceTrace) -> Result<()> {
    fs::write(path, trace_csv(trace)).map_err(|e| Error::io(path, e))
}

/// One parsed trace row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: f64,
    pub rel_energy: f64,
    pub rel_u: f64,
    pub seconds: f64,
    pub psnr: Option<f64>,
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRow>> {
    let bad = |m: String| Error::Format {
        path: "trace".into(),
        message: m,
    };
    let mut lines = text.lines();
    if lines.next() != Some(TRACE_SCHEMA) {
        return Err(bad("missing schema line".into()));
    }
    if lines.next() != Some(TRACE_COLUMNS) {
        return Err(bad("unexpected column header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad(format!("expected 6 fields in `{line}`")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
            Ok(TraceRow {
                iter: f[0].parse().map_err(|e| bad(format!("`{}`: {e}", f[0])))?,
                energy: num(f[1])?,
                rel_energy: num(f[2])?,
                rel_u: num(f[3])?,
                seconds: num(f[4])?,
                psnr: if f[5].is_empty() { None } else { Some(num(f[5])?) },
            })
        })
        .collect()
}

/// JSON form of a run's final metrics. Non-finite values (the PSNR of an
/// exact reconstruction) are written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub command: String,
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
    /// PSNR of the noisy input or the zero-filled/backprojected start.
    pub baseline_psnr: Option<f64>,
    pub initial_energy: f64,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time: f64,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl ReportJson {
    pub fn new(command: &str, metrics: &MetricReport, baseline_psnr: Option<f64>, trace: &ConvergenceTrace) -> Self {
        Self {
            command: command.into(),
            psnr: finite(metrics.psnr),
            ssim: finite(metrics.ssim),
            baseline_psnr: baseline_psnr.and_then(finite),
            initial_energy: trace.initial_energy,
            energy: metrics.energy,
            iterations: metrics.iterations,
            converged: trace.converged,
            wall_time: metrics.wall_time,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}
