//! k-space sampling masks.
//!
//! Masks are stored centered: entry `(rows / 2, cols / 2)` is the zero
//! frequency.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskKind {
    Cartesian,
    Radial,
}

impl MaskKind {
    pub fn name(self) -> &'static str {
        match self {
            MaskKind::Cartesian => "cartesian",
            MaskKind::Radial => "radial",
        }
    }
}

impl FromStr for MaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cartesian" => Ok(MaskKind::Cartesian),
            "radial" => Ok(MaskKind::Radial),
            other => Err(Error::InvalidConfig(format!("unknown mask kind `{other}`"))),
        }
    }
}

/// Fraction of rows in the fully sampled low-frequency band of Cartesian
/// masks.
pub const CARTESIAN_CENTER_FRACTION: f64 = 0.08;

/// Golden angle for radial spokes, `pi (sqrt 5 - 1) / 2`.
pub const GOLDEN_ANGLE: f64 = 1.941_611_038_725_466_6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingMask {
    kind: MaskKind,
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

fn check_rate(rate: f64) -> Result<()> {
    if rate > 0.0 && rate <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "sampling rate must lie in (0, 1], got {rate}"
        )))
    }
}

impl SamplingMask {
    pub fn new(kind: MaskKind, rows: usize, cols: usize, data: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidImage(format!("empty mask {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        Ok(Self { kind, rows, cols, data })
    }

    /// Every frequency sampled.
    pub fn full(rows: usize, cols: usize) -> Result<Self> {
        Self::new(MaskKind::Cartesian, rows, cols, vec![true; rows * cols])
    }

    /// Golden-angle spokes through the center, added until `rate` is reached.
    pub fn radial(rows: usize, cols: usize, rate: f64) -> Result<Self> {
        check_rate(rate)?;
        let mut mask = Self::new(MaskKind::Radial, rows, cols, vec![false; rows * cols])?;
        let (cr, cc) = ((rows / 2) as f64, (cols / 2) as f64);
        let reach = math::sqrt((rows * rows + cols * cols) as f64) / 2.0 + 1.0;
        let steps = (4.0 * reach) as isize;
        let mut spoke = 0usize;
        while mask.rate() < rate {
            let theta = spoke as f64 * GOLDEN_ANGLE;
            let (s, c) = (math::sin(theta), math::cos(theta));
            for k in -steps..=steps {
                let rho = k as f64 * 0.5;
                let r = math::round(cr - rho * s);
                let col = math::round(cc + rho * c);
                if r >= 0.0 && col >= 0.0 && (r as usize) < rows && (col as usize) < cols {
                    mask.data[r as usize * cols + col as usize] = true;
                }
            }
            spoke += 1;
            if spoke > 64 * (rows + cols) {
                break;
            }
        }
        Ok(mask)
    }

    /// Fully sampled central band of rows plus random rows from `seed`
    /// until `rate` is reached.
    pub fn cartesian(rows: usize, cols: usize, rate: f64, seed: u64) -> Result<Self> {
        check_rate(rate)?;
        let mut mask = Self::new(MaskKind::Cartesian, rows, cols, vec![false; rows * cols])?;
        let band = (math::ceil(CARTESIAN_CENTER_FRACTION * rows as f64) as usize).clamp(1, rows);
        let first = (rows / 2).saturating_sub(band / 2).min(rows - band);
        let mut order: Vec<usize> = (0..rows).filter(|r| !(first..first + band).contains(r)).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let take = |mask: &mut Self, r: usize| mask.data[r * cols..(r + 1) * cols].fill(true);
        for r in first..first + band {
            take(&mut mask, r);
        }
        for r in order {
            if mask.rate() >= rate {
                break;
            }
            take(&mut mask, r);
        }
        Ok(mask)
    }

    pub fn kind(&self) -> MaskKind {
        self.kind
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Row-major centered samples.
    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn sampled(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn rate(&self) -> f64 {
        self.sampled() as f64 / self.data.len() as f64
    }

    /// Whether the unshifted frequency `(kr, kc)` (DC at `(0, 0)`) is sampled.
    pub fn contains_frequency(&self, kr: usize, kc: usize) -> bool {
        let r = (kr + self.rows / 2) % self.rows;
        let c = (kc + self.cols / 2) % self.cols;
        self.data[r * self.cols + c]
    }

    /// Unshifted row-major flat indices of the sampled frequencies, ascending.
    pub fn sampled_frequencies(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.sampled());
        for kr in 0..self.rows {
            for kc in 0..self.cols {
                if self.contains_frequency(kr, kc) {
                    out.push(kr * self.cols + kc);
                }
            }
        }
        out
    }
}
