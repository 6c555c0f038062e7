//! Synthetic test images with ground truth, and reproducible Gaussian noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image::ImagePlane;
use crate::segmentation::Codebook;
use crate::Real;

/// Name of the noise generator, recorded in run logs next to the seed.
pub const NOISE_GENERATOR: &str = "ChaCha8Rng+Normal";

/// Smallest side accepted by the generators.
pub const MIN_SIDE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// White 0-1 grid lines on black.
    Grid,
    /// Four flat gray regions: background, disc, right triangle, rectangle.
    Cartoon,
    /// Six colour bands on concentric arcs.
    Stripes,
}

impl SyntheticKind {
    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::Grid => "grid",
            SyntheticKind::Cartoon => "cartoon",
            SyntheticKind::Stripes => "stripes",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "grid" => Some(SyntheticKind::Grid),
            "cartoon" => Some(SyntheticKind::Cartoon),
            "stripes" => Some(SyntheticKind::Stripes),
            _ => None,
        }
    }
}

/// A clean image (one plane per channel), its label map and the exact codebook.
#[derive(Debug, Clone)]
pub struct Synthetic<T: Real> {
    pub kind: SyntheticKind,
    pub channels: Vec<ImagePlane<T>>,
    pub truth: Vec<usize>,
    pub codebook: Codebook<T>,
}

impl<T: Real> Synthetic<T> {
    pub fn side(&self) -> usize {
        self.channels[0].side()
    }
}

pub fn synthesize<T: Real>(kind: SyntheticKind, n: usize) -> Result<Synthetic<T>> {
    if n < MIN_SIDE {
        return Err(Error::InvalidParameter(format!("synthetic images need side >= {MIN_SIDE}, got {n}")));
    }
    let truth: Vec<usize> = (0..n * n)
        .map(|i| match kind {
            SyntheticKind::Grid => grid_label(n, i / n, i % n),
            SyntheticKind::Cartoon => cartoon_label(n, i / n, i % n),
            SyntheticKind::Stripes => stripes_label(n, i / n, i % n),
        })
        .collect();
    let codebook = match kind {
        SyntheticKind::Grid => Codebook::gray(&[T::zero(), T::one()])?,
        SyntheticKind::Cartoon => Codebook::gray(&CARTOON_LEVELS.map(T::lit))?,
        SyntheticKind::Stripes => Codebook::new(STRIPE_COLORS.iter().map(|c| c.map(T::lit).to_vec()).collect())?,
    };
    let channels = (0..codebook.channels())
        .map(|ch| ImagePlane::new(n, truth.iter().map(|&k| codebook.entry(k)[ch]).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Synthetic { kind, channels, truth, codebook })
}

/// Grid period and line width for side `n`: period `n / 16`, width `max(2, n / 128)`.
pub fn grid_geometry(n: usize) -> (usize, usize) {
    ((n / 16).max(4), (n / 128).max(2))
}

fn grid_label(n: usize, r: usize, c: usize) -> usize {
    let (period, width) = grid_geometry(n);
    usize::from(r % period < width || c % period < width)
}

const CARTOON_LEVELS: [f64; 4] = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];

fn unit(n: usize, i: usize) -> f64 {
    (i as f64 + 0.5) / n as f64
}

/// The triangle's hypotenuse `x + y = 1 + 1/(2n)` runs halfway between two
/// pixel diagonals, so no pixel centre lies on it.
fn diagonal_offset(n: usize) -> f64 {
    1.0 + 0.5 / n as f64
}

fn cartoon_label(n: usize, r: usize, c: usize) -> usize {
    let (y, x) = (unit(n, r), unit(n, c));
    if (y - 0.3).powi(2) + (x - 0.3).powi(2) <= 0.18f64.powi(2) {
        1
    } else if y <= 0.45 && x <= 0.9 && x + y >= diagonal_offset(n) {
        2
    } else if (0.6..=0.9).contains(&y) && (0.15..=0.85).contains(&x) {
        3
    } else {
        0
    }
}

/// Mask of pixels within 1.5 pixels of the cartoon triangle's diagonal edge
/// (the hypotenuse between its two acute corners).
pub fn cartoon_diagonal_band(n: usize) -> Vec<bool> {
    let h = 1.5 / n as f64;
    (0..n * n)
        .map(|i| {
            let (y, x) = (unit(n, i / n), unit(n, i % n));
            let dist = (x + y - diagonal_offset(n)).abs() / std::f64::consts::SQRT_2;
            dist <= h && (0.1 - h..=0.45 + h).contains(&y) && (0.55 - h..=0.9 + h).contains(&x)
        })
        .collect()
}

const STRIPE_COLORS: [[f64; 3]; 6] = [
    [0.90, 0.20, 0.20],
    [0.95, 0.75, 0.15],
    [0.25, 0.70, 0.30],
    [0.15, 0.45, 0.85],
    [0.55, 0.25, 0.70],
    [0.95, 0.95, 0.90],
];

fn stripes_label(n: usize, r: usize, c: usize) -> usize {
    // arcs centred beyond the bottom-right corner
    let (y, x) = (unit(n, r), unit(n, c));
    let d = ((y - 1.3).powi(2) + (x - 1.2).powi(2)).sqrt();
    let band = (d / 0.09).floor() as usize;
    band % STRIPE_COLORS.len()
}

/// Add i.i.d. `N(0, sigma^2)` noise to every channel, deterministically in `seed`.
///
/// Values are not clamped.
pub fn add_gaussian_noise<T: Real>(channels: &[ImagePlane<T>], sigma: f64, seed: u64) -> Result<Vec<ImagePlane<T>>> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(format!("noise sigma {sigma}: {e}")))?;
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise sigma must be non-negative, got {sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    log::info!("noise: generator {NOISE_GENERATOR}, seed {seed}, sigma {sigma}");
    channels
        .iter()
        .map(|plane| {
            let data = plane.as_slice().iter().map(|&x| x + T::lit(normal.sample(&mut rng))).collect();
            ImagePlane::new(plane.side(), data)
        })
        .collect()
}
