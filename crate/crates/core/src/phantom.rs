//! Analytic test images.
//!
//! * `shepp_logan`: the modified (high-contrast) Shepp-Logan head, values in
//!   `[0, 1]`, peak 1.
//! * `triangle`: one bright triangle on a dark background, peak 255.
//! * `shapes`: several piecewise-constant shapes (disk, rectangle, triangle,
//!   ellipse ring), peak 255. Stands in for the Forbild phantom, whose exact
//!   geometry is not reproduced here.
//!
//! Pixels are sampled at their centers, so every phantom is piecewise
//! constant with sharp edges.

use alloc::string::ToString;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::image::{Image, PEAK_8BIT};
use crate::math;

pub const MIN_PHANTOM_SIZE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomKind {
    SheppLogan,
    Triangle,
    Shapes,
}

impl PhantomKind {
    pub fn name(self) -> &'static str {
        match self {
            PhantomKind::SheppLogan => "shepp_logan",
            PhantomKind::Triangle => "triangle",
            PhantomKind::Shapes => "shapes",
        }
    }

    pub fn peak(self) -> f64 {
        match self {
            PhantomKind::SheppLogan => 1.0,
            PhantomKind::Triangle | PhantomKind::Shapes => PEAK_8BIT,
        }
    }
}

impl FromStr for PhantomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "shepp_logan" | "shepplogan" => Ok(PhantomKind::SheppLogan),
            "triangle" => Ok(PhantomKind::Triangle),
            "shapes" => Ok(PhantomKind::Shapes),
            _ => Err(Error::UnknownPhantom(s.to_string())),
        }
    }
}

/// Ellipse parameters: intensity, semi-axes (a, b), center (x0, y0), rotation in degrees.
pub const SHEPP_LOGAN_ELLIPSES: [[f64; 6]; 10] = [
    [1.0, 0.69, 0.92, 0.0, 0.0, 0.0],
    [-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0],
    [-0.2, 0.11, 0.31, 0.22, 0.0, -18.0],
    [-0.2, 0.16, 0.41, -0.22, 0.0, 18.0],
    [0.1, 0.21, 0.25, 0.0, 0.35, 0.0],
    [0.1, 0.046, 0.046, 0.0, 0.1, 0.0],
    [0.1, 0.046, 0.046, 0.0, -0.1, 0.0],
    [0.1, 0.046, 0.023, -0.08, -0.605, 0.0],
    [0.1, 0.023, 0.023, 0.0, -0.606, 0.0],
    [0.1, 0.023, 0.046, 0.06, -0.605, 0.0],
];

// Pixel center in [-1, 1]^2 with y pointing up.
fn unit_coords(row: usize, col: usize, size: usize) -> (f64, f64) {
    let n = size as f64;
    let x = 2.0 * (col as f64 + 0.5) / n - 1.0;
    let y = 1.0 - 2.0 * (row as f64 + 0.5) / n;
    (x, y)
}

fn inside_ellipse(x: f64, y: f64, e: &[f64; 6]) -> bool {
    let phi = e[5].to_radians();
    let (s, c) = (math::sin(phi), math::cos(phi));
    let dx = x - e[3];
    let dy = y - e[4];
    let xr = dx * c + dy * s;
    let yr = -dx * s + dy * c;
    (xr / e[1]) * (xr / e[1]) + (yr / e[2]) * (yr / e[2]) <= 1.0
}

fn shepp_logan(size: usize) -> Image {
    Image::from_fn(size, size, 1.0, |r, c| {
        let (x, y) = unit_coords(r, c, size);
        let v: f64 = SHEPP_LOGAN_ELLIPSES
            .iter()
            .filter(|e| inside_ellipse(x, y, e))
            .map(|e| e[0])
            .sum();
        v.clamp(0.0, 1.0)
    })
}

// Same-side test against the three directed edges.
fn inside_triangle(x: f64, y: f64, v: &[(f64, f64); 3]) -> bool {
    let edge = |a: (f64, f64), b: (f64, f64)| (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0);
    let e0 = edge(v[0], v[1]);
    let e1 = edge(v[1], v[2]);
    let e2 = edge(v[2], v[0]);
    (e0 >= 0.0 && e1 >= 0.0 && e2 >= 0.0) || (e0 <= 0.0 && e1 <= 0.0 && e2 <= 0.0)
}

const TRIANGLE: [(f64, f64); 3] = [(-0.7, -0.6), (0.75, -0.45), (-0.1, 0.72)];

fn triangle(size: usize) -> Image {
    Image::from_fn(size, size, PEAK_8BIT, |r, c| {
        let (x, y) = unit_coords(r, c, size);
        if inside_triangle(x, y, &TRIANGLE) {
            200.0
        } else {
            60.0
        }
    })
}

fn shapes(size: usize) -> Image {
    const SMALL_TRIANGLE: [(f64, f64); 3] = [(0.15, -0.85), (0.85, -0.85), (0.5, -0.2)];
    Image::from_fn(size, size, PEAK_8BIT, |r, c| {
        let (x, y) = unit_coords(r, c, size);
        let mut v = 40.0;
        if (-0.85..=-0.15).contains(&x) && (0.2..=0.8).contains(&y) {
            v = 150.0;
        }
        if (x - 0.45) * (x - 0.45) + (y - 0.45) * (y - 0.45) <= 0.33 * 0.33 {
            v = 210.0;
        }
        if inside_triangle(x, y, &SMALL_TRIANGLE) {
            v = 120.0;
        }
        let ring = [0.0, 0.42, 0.28, -0.45, -0.45, 30.0];
        let hole = [0.0, 0.25, 0.14, -0.45, -0.45, 30.0];
        if inside_ellipse(x, y, &ring) && !inside_ellipse(x, y, &hole) {
            v = 95.0;
        }
        v
    })
}

/// Rasterizes the phantom on a `size x size` grid.
pub fn phantom(kind: PhantomKind, size: usize) -> Result<Image> {
    if size < MIN_PHANTOM_SIZE {
        return Err(Error::InvalidConfig(alloc::format!(
            "phantom size must be at least {MIN_PHANTOM_SIZE}, got {size}"
        )));
    }
    Ok(match kind {
        PhantomKind::SheppLogan => shepp_logan(size),
        PhantomKind::Triangle => triangle(size),
        PhantomKind::Shapes => shapes(size),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_names() {
        assert_eq!("shepp_logan".parse::<PhantomKind>().unwrap(), PhantomKind::SheppLogan);
        assert_eq!("Shepp-Logan".parse::<PhantomKind>().unwrap(), PhantomKind::SheppLogan);
        assert_eq!("shapes".parse::<PhantomKind>().unwrap(), PhantomKind::Shapes);
        assert!(matches!(
            "forbild".parse::<PhantomKind>(),
            Err(Error::UnknownPhantom(_))
        ));
    }

    #[test]
    fn rejects_small_sizes() {
        assert!(phantom(PhantomKind::Triangle, 31).is_err());
    }

    #[test]
    fn shepp_logan_range() {
        for size in [32, 64, 100, 128] {
            let img = phantom(PhantomKind::SheppLogan, size).unwrap();
            assert!(img.data().iter().all(|v| (0.0..=1.0).contains(v)));
            assert_eq!(img.peak(), 1.0);
            // Skull rim reaches full intensity.
            assert!(img.data().contains(&1.0));
        }
    }

    #[test]
    fn shepp_logan_center_pixel() {
        // Pixel (64, 64) of a 128 grid sits at (x, y) = (1/128, -1/128):
        // inside ellipses 1 and 2 only (the two small disks at y = +-0.1 have
        // radius 0.046), so the value is 1.0 - 0.8.
        let img = phantom(PhantomKind::SheppLogan, 128).unwrap();
        assert!((img.get(64, 64) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn triangle_is_two_level() {
        let img = phantom(PhantomKind::Triangle, 64).unwrap();
        assert!(img.data().iter().all(|&v| v == 60.0 || v == 200.0));
        assert!(img.data().iter().filter(|&&v| v == 200.0).count() > 64 * 64 / 5);
    }

    #[test]
    fn shapes_within_peak() {
        let img = phantom(PhantomKind::Shapes, 96).unwrap();
        assert!(img.data().iter().all(|&v| (0.0..=255.0).contains(&v)));
        let mut levels: alloc::vec::Vec<u32> = img.data().iter().map(|&v| v as u32).collect();
        levels.sort_unstable();
        levels.dedup();
        assert_eq!(levels, alloc::vec![40, 95, 120, 150, 210]);
    }

    #[test]
    fn deterministic() {
        let a = phantom(PhantomKind::Shapes, 64).unwrap();
        let b = phantom(PhantomKind::Shapes, 64).unwrap();
        assert_eq!(a, b);
    }
}
