//! File formats: binary PGM images and masks, CSV images with a JSON
//! sidecar, and measurement CSVs with a JSON header.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use curvemg_core::image::Image;
use curvemg_core::mask::{MaskKind, SamplingMask};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn format_error(path: &Path, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: msg.into(),
    }
}

/// `foo/bar.csv` becomes `foo/bar.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

// Next whitespace-delimited PGM header token, skipping `#` comments.
fn header_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

/// Decodes a binary (P5) PGM; the image peak is the file's maxval.
pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<Image> {
    let mut pos = 0;
    let mut next =
        |what: &str| header_token(bytes, &mut pos).ok_or_else(|| format_error(path, format!("missing {what}")));
    if next("magic")? != "P5" {
        return Err(format_error(path, "only binary P5 PGM is supported"));
    }
    let mut number = |what: &str| -> Result<usize> {
        next(what)?
            .parse()
            .map_err(|_| format_error(path, format!("bad {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if !(1..=65535).contains(&maxval) {
        return Err(format_error(path, format!("maxval {maxval} outside 1..=65535")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let depth = if maxval < 256 { 1 } else { 2 };
    let needed = width * height * depth;
    let raster = bytes
        .get(pos..pos + needed)
        .ok_or_else(|| format_error(path, "truncated raster"))?;
    let data = if depth == 1 {
        raster.iter().map(|&b| f64::from(b)).collect()
    } else {
        raster
            .chunks_exact(2)
            .map(|p| f64::from(u16::from_be_bytes([p[0], p[1]])))
            .collect()
    };
    Ok(Image::new(width, height, data, maxval as f64)?)
}

/// Encodes as P5 with `maxval = round(peak)` (8-bit when it fits), clamping
/// and rounding every sample.
pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let maxval = img.peak().round().clamp(1.0, 65535.0) as u32;
    let mut out = format!("P5\n{} {}\n{}\n", img.width(), img.height(), maxval).into_bytes();
    let quantize = |v: f64| v.round().clamp(0.0, f64::from(maxval)) as u16;
    if maxval < 256 {
        out.extend(img.data().iter().map(|&v| quantize(v) as u8));
    } else {
        for &v in img.data() {
            out.extend_from_slice(&quantize(v).to_be_bytes());
        }
    }
    out
}

pub fn read_pgm(path: &Path) -> Result<Image> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes, path)
}

pub fn write_pgm(path: &Path, img: &Image) -> Result<()> {
    fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

/// Sidecar of a CSV image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageHeader {
    pub rows: usize,
    pub cols: usize,
    pub peak: f64,
}

fn write_rows(path: &Path, rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in 0..rows {
        let line: Vec<String> = values[r * cols..(r + 1) * cols]
            .iter()
            .map(|v| format!("{v:?}"))
            .collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows(path: &Path) -> Result<(usize, Vec<f64>)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    let mut width = None;
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| format_error(path, format!("line {}: {e}", n + 1)))?;
        if *width.get_or_insert(row.len()) != row.len() {
            return Err(format_error(path, format!("line {} has {} values", n + 1, row.len())));
        }
        values.extend(row);
    }
    Ok((width.unwrap_or(0), values))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| format_error(path, e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| format_error(path, e.to_string()))
}

/// Writes `img` as CSV plus the `.json` sidecar.
pub fn write_csv_image(path: &Path, img: &Image) -> Result<()> {
    write_rows(path, img.height(), img.width(), img.data())?;
    write_json(
        &sidecar_path(path),
        &ImageHeader {
            rows: img.height(),
            cols: img.width(),
            peak: img.peak(),
        },
    )
}

/// Reads a CSV image; without a sidecar the peak defaults to 255.
pub fn read_csv_image(path: &Path) -> Result<Image> {
    let (cols, values) = read_rows(path)?;
    let sidecar = sidecar_path(path);
    let header = if sidecar.exists() {
        read_json::<ImageHeader>(&sidecar)?
    } else {
        ImageHeader {
            rows: values.len().checked_div(cols).unwrap_or(0),
            cols,
            peak: curvemg_core::image::PEAK_8BIT,
        }
    };
    if header.cols != cols || header.rows * header.cols != values.len() {
        return Err(format_error(
            path,
            format!(
                "sidecar says {}x{}, file holds {} values in rows of {cols}",
                header.rows,
                header.cols,
                values.len()
            ),
        ));
    }
    Ok(Image::new(cols, header.rows, values, header.peak)?)
}

/// Reads `.pgm` or `.csv` by extension.
pub fn read_image(path: &Path) -> Result<Image> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("pgm") => read_pgm(path),
        Some("csv") => read_csv_image(path),
        _ => Err(format_error(path, "expected a .pgm or .csv image")),
    }
}

pub fn write_image(path: &Path, img: &Image) -> Result<()> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("csv") => write_csv_image(path, img),
        _ => write_pgm(path, img),
    }
}

/// Acquisition description stored next to a measurement CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementHeader {
    /// Rows are angles, columns detector bins.
    Sinogram {
        rows: usize,
        cols: usize,
        angles: Vec<f64>,
        detector_count: usize,
        detector_spacing: f64,
        pixel_size: f64,
        noise_sigma: f64,
    },
    /// One `kr,kc,re,im` line per sampled frequency (unshifted indices).
    Kspace {
        rows: usize,
        cols: usize,
        mask: String,
        rate: f64,
        seed: u64,
        noise_sigma: f64,
    },
}

pub fn write_sinogram(path: &Path, header: &MeasurementHeader, values: &[f64]) -> Result<()> {
    let MeasurementHeader::Sinogram {
        angles, detector_count, ..
    } = header
    else {
        return Err(format_error(path, "sinogram header expected"));
    };
    write_rows(path, angles.len(), *detector_count, values)?;
    write_json(&sidecar_path(path), header)
}

pub fn write_kspace(path: &Path, header: &MeasurementHeader, frequencies: &[usize], values: &[f64]) -> Result<()> {
    let MeasurementHeader::Kspace { cols, .. } = header else {
        return Err(format_error(path, "k-space header expected"));
    };
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (k, &f) in frequencies.iter().enumerate() {
        writeln!(
            w,
            "{},{},{:?},{:?}",
            f / cols,
            f % cols,
            values[2 * k],
            values[2 * k + 1]
        )
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    write_json(&sidecar_path(path), header)
}

/// Reads a measurement CSV and its header. K-space files return the
/// interleaved `(re, im)` values and the unshifted frequency indices.
pub fn read_measurements(path: &Path) -> Result<(MeasurementHeader, Vec<f64>, Vec<usize>)> {
    let header: MeasurementHeader = read_json(&sidecar_path(path))?;
    let (width, values) = read_rows(path)?;
    match &header {
        MeasurementHeader::Sinogram {
            angles, detector_count, ..
        } => {
            if width != *detector_count || values.len() != angles.len() * detector_count {
                return Err(format_error(path, "sinogram size disagrees with its header"));
            }
            Ok((header, values, Vec::new()))
        }
        MeasurementHeader::Kspace { cols, .. } => {
            if width != 4 && !values.is_empty() {
                return Err(format_error(path, "k-space lines must be kr,kc,re,im"));
            }
            let mut freqs = Vec::with_capacity(values.len() / 4);
            let mut data = Vec::with_capacity(values.len() / 2);
            for q in values.chunks_exact(4) {
                freqs.push(q[0] as usize * cols + q[1] as usize);
                data.extend_from_slice(&q[2..4]);
            }
            Ok((header, data, freqs))
        }
    }
}

/// Centered mask as an 8-bit PGM (255 = sampled).
pub fn write_mask_pgm(path: &Path, mask: &SamplingMask) -> Result<()> {
    let (rows, cols) = mask.dims();
    let data = mask.data().iter().map(|&b| if b { 255.0 } else { 0.0 }).collect();
    write_pgm(path, &Image::new(cols, rows, data, 255.0)?)
}

/// Any nonzero pixel counts as sampled.
pub fn read_mask_pgm(path: &Path, kind: MaskKind) -> Result<SamplingMask> {
    let img = read_pgm(path)?;
    let (rows, cols) = img.dims();
    Ok(SamplingMask::new(
        kind,
        rows,
        cols,
        img.data().iter().map(|&v| v > 0.0).collect(),
    )?)
}
