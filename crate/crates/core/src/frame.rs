//! Subband enumeration and frequency-domain spectra of the shearlet frame.
//!
//! Frequencies live on the centered integer grid
//! `{-floor(N/2), ..., ceil(N/2) - 1}^2`. Spectra are evaluated there and
//! stored in DFT wrap-around order so the transform can multiply directly.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::{centered_frequency, dft_index, Fft2};
use crate::meyer::{phi_hat_2d, psi1_hat, psi1_hat_open, psi2_hat};
use crate::Real;

/// Side length and scale count of a square frequency grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    n: usize,
    j0: usize,
}

impl GridSpec {
    pub const MIN_SIDE: usize = 4;

    /// `j0 = floor(log2(N) / 2)` in integer arithmetic.
    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_SIDE {
            return Err(Error::GridTooSmall(n));
        }
        Ok(Self { n, j0: (n.ilog2() / 2) as usize })
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn scales(&self) -> usize {
        self.j0
    }

    /// Number of subbands `1 + sum_j 2^(j+2) = 1 + 4 (2^j0 - 1)`.
    pub fn subband_count(&self) -> usize {
        1 + 4 * ((1usize << self.j0) - 1)
    }

    /// Lowest and highest centered frequency along one axis.
    pub fn frequency_range(&self) -> (isize, isize) {
        (-((self.n / 2) as isize), self.n.div_ceil(2) as isize - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubbandKind {
    Lowpass,
    Horizontal,
    Vertical,
    Seam,
}

impl SubbandKind {
    pub fn name(self) -> &'static str {
        match self {
            SubbandKind::Lowpass => "lowpass",
            SubbandKind::Horizontal => "horizontal",
            SubbandKind::Vertical => "vertical",
            SubbandKind::Seam => "seam",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "lowpass" => SubbandKind::Lowpass,
            "horizontal" => SubbandKind::Horizontal,
            "vertical" => SubbandKind::Vertical,
            "seam" => SubbandKind::Seam,
            _ => return None,
        })
    }
}

/// One subband: the low-pass plane, a cone shearlet `(j, k)` with
/// `|k| < 2^j`, or a seam-glued shearlet with `|k| = 2^j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubbandIndex {
    pub kind: SubbandKind,
    pub j: usize,
    pub k: isize,
}

impl SubbandIndex {
    pub const LOWPASS: SubbandIndex = SubbandIndex { kind: SubbandKind::Lowpass, j: 0, k: 0 };

    pub fn horizontal(j: usize, k: isize) -> Self {
        Self { kind: SubbandKind::Horizontal, j, k }
    }

    pub fn vertical(j: usize, k: isize) -> Self {
        Self { kind: SubbandKind::Vertical, j, k }
    }

    pub fn seam(j: usize, k: isize) -> Self {
        Self { kind: SubbandKind::Seam, j, k }
    }

    /// Whether this index is part of the enumeration for `grid`.
    pub fn is_valid_for(&self, grid: &GridSpec) -> bool {
        let shears = 1isize << self.j;
        match self.kind {
            SubbandKind::Lowpass => self.j == 0 && self.k == 0,
            SubbandKind::Horizontal | SubbandKind::Vertical => self.j < grid.j0 && self.k.abs() < shears,
            SubbandKind::Seam => self.j < grid.j0 && self.k.abs() == shears,
        }
    }
}

impl fmt::Display for SubbandIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.kind.name(), self.j, self.k)
    }
}

/// Deterministic subband order: lowpass, then by scale, then kind
/// (horizontal, vertical, seam), then shear ascending.
pub fn enumerate_subbands(grid: &GridSpec) -> Vec<SubbandIndex> {
    let mut out = Vec::with_capacity(grid.subband_count());
    out.push(SubbandIndex::LOWPASS);
    for j in 0..grid.j0 {
        let s = 1isize << j;
        out.extend((-s + 1..s).map(|k| SubbandIndex::horizontal(j, k)));
        out.extend((-s + 1..s).map(|k| SubbandIndex::vertical(j, k)));
        out.push(SubbandIndex::seam(j, -s));
        out.push(SubbandIndex::seam(j, s));
    }
    out
}

/// Directional region a frequency belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    /// `|w1| >= 1/2, |w2| < |w1|`
    Horizontal,
    /// `|w2| >= 1/2, |w2| > |w1|`
    Vertical,
    /// `|w1| = |w2| >= 1/2`
    Seam,
    /// None of the above; such points lie in the low-frequency square `(-1/2, 1/2)^2`.
    Low,
}

/// Classify a frequency into the (mutually disjoint) directional cones.
///
/// The low-frequency set `|w1| < 1, |w2| < 1` overlaps the directional cones;
/// use [`in_low_square`] to test membership in it.
pub fn cone_of<T: Real>(w1: T, w2: T) -> Cone {
    let (a1, a2) = (w1.abs(), w2.abs());
    let half = T::lit(0.5);
    if a1 >= half && a2 < a1 {
        Cone::Horizontal
    } else if a2 >= half && a2 > a1 {
        Cone::Vertical
    } else if a1 >= half && a1 == a2 {
        Cone::Seam
    } else {
        Cone::Low
    }
}

/// Membership in the low-frequency set `|w1| < 1, |w2| < 1`.
pub fn in_low_square<T: Real>(w1: T, w2: T) -> bool {
    w1.abs() < T::one() && w2.abs() < T::one()
}

/// Radial profile used at the finest scale `j0 - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FinestScale {
    /// Taper removed beyond the peak so the scale ladder reaches the grid's
    /// Nyquist frequency for every N. Identical samples to [`FinestScale::Meyer`]
    /// when N is a power of 4.
    #[default]
    Open,
    /// The plain Meyer profile at every scale. Only a Parseval frame when the
    /// grid does not extend beyond `2 * 4^(j0-1)`, i.e. `N` a power of 4 (or one more).
    Meyer,
}

fn radial<T: Real>(x: T, j: usize, j0: usize, finest: FinestScale) -> T {
    if finest == FinestScale::Open && j + 1 == j0 {
        psi1_hat_open(x)
    } else {
        psi1_hat(x)
    }
}

/// Continuous-frequency value of a subband's spectrum.
///
/// The cone test runs before the shear ratio is formed, so the ratio is
/// never evaluated with a zero denominator.
pub fn subband_value<T: Real>(sb: &SubbandIndex, w1: T, w2: T, j0: usize, finest: FinestScale) -> T {
    let scale = T::lit(4f64.powi(-(sb.j as i32)));
    let shear_scale = T::of_usize(1 << sb.j);
    let k = T::of_isize(sb.k);
    let horizontal = || radial(scale * w1, sb.j, j0, finest) * psi2_hat(shear_scale * w2 / w1 + k);
    let vertical = || radial(scale * w2, sb.j, j0, finest) * psi2_hat(shear_scale * w1 / w2 + k);
    let cone = cone_of(w1, w2);
    match sb.kind {
        SubbandKind::Lowpass => phi_hat_2d(w1, w2),
        SubbandKind::Horizontal if cone == Cone::Horizontal => horizontal(),
        SubbandKind::Vertical if cone == Cone::Vertical => vertical(),
        SubbandKind::Seam => match cone {
            // the diagonal part uses the horizontal parameterisation; on
            // |w1| = |w2| both coincide
            Cone::Horizontal | Cone::Seam => horizontal(),
            Cone::Vertical => vertical(),
            Cone::Low => T::zero(),
        },
        _ => T::zero(),
    }
}

/// Value at a grid frequency. On even grids the row/column `-N/2` also stands
/// for `+N/2`; there the value is the root mean square over both
/// representatives, which keeps the spectrum DFT-even and the squares summing to 1.
fn grid_value<T: Real>(sb: &SubbandIndex, w1: isize, w2: isize, grid: &GridSpec, finest: FinestScale) -> T {
    let n = grid.n as isize;
    let reps = |w: isize| -> &'static [isize] {
        if grid.n.is_multiple_of(2) && w == -n / 2 {
            &[-1, 1]
        } else {
            &[1]
        }
    };
    let (r1, r2) = (reps(w1), reps(w2));
    if r1.len() == 1 && r2.len() == 1 {
        return subband_value(sb, T::of_isize(w1), T::of_isize(w2), grid.j0, finest);
    }
    let mut acc = T::zero();
    for &s1 in r1 {
        for &s2 in r2 {
            let x = subband_value(sb, T::of_isize(s1 * w1), T::of_isize(s2 * w2), grid.j0, finest);
            acc += x * x;
        }
    }
    (acc / T::of_usize(r1.len() * r2.len())).sqrt()
}

/// Spectrum of one subband on the grid, stored in DFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub subband: SubbandIndex,
    side: usize,
    values: Vec<T>,
}

impl<T: Real> Spectrum<T> {
    /// Value at centered frequency `(w1, w2)`.
    pub fn at(&self, w1: isize, w2: isize) -> T {
        self.values[dft_index(w1, self.side) * self.side + dft_index(w2, self.side)]
    }

    /// Values in DFT wrap-around order.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn side(&self) -> usize {
        self.side
    }
}

fn spectrum_values<T: Real>(sb: &SubbandIndex, grid: &GridSpec, finest: FinestScale) -> Vec<T> {
    let n = grid.n;
    let mut values = vec![T::zero(); n * n];
    for k1 in 0..n {
        let w1 = centered_frequency(k1, n);
        for k2 in 0..n {
            let w2 = centered_frequency(k2, n);
            values[k1 * n + k2] = grid_value(sb, w1, w2, grid, finest);
        }
    }
    values
}

/// Build one subband's spectrum with the default finest-scale profile.
pub fn build_spectrum<T: Real>(subband: SubbandIndex, grid: &GridSpec) -> Result<Spectrum<T>> {
    build_spectrum_with(subband, grid, FinestScale::default())
}

pub fn build_spectrum_with<T: Real>(
    subband: SubbandIndex,
    grid: &GridSpec,
    finest: FinestScale,
) -> Result<Spectrum<T>> {
    if !subband.is_valid_for(grid) {
        return Err(Error::SubbandMismatch { subband: subband.to_string(), j0: grid.j0 });
    }
    Ok(Spectrum { subband, side: grid.n, values: spectrum_values(&subband, grid, finest) })
}

/// All subband spectra of an `N x N` grid. Immutable once built.
#[derive(Clone)]
pub struct ShearletSystem<T: Real> {
    grid: GridSpec,
    finest: FinestScale,
    subbands: Vec<SubbandIndex>,
    /// `eta * N^2`, subband-major, each plane in DFT order.
    spectra: Vec<T>,
    fft: Fft2<T>,
}

impl<T: Real> fmt::Debug for ShearletSystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShearletSystem")
            .field("grid", &self.grid)
            .field("finest", &self.finest)
            .field("subbands", &self.subbands.len())
            .finish()
    }
}

impl<T: Real> ShearletSystem<T> {
    /// Build and validate the system for side `n`.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_finest_scale(n, FinestScale::default())
    }

    /// Build with an explicit finest-scale profile. Fails with
    /// [`Error::PartitionOfUnityViolation`] if the squared spectra do not sum to 1
    /// at every grid frequency.
    pub fn with_finest_scale(n: usize, finest: FinestScale) -> Result<Self> {
        let system = Self::unchecked(GridSpec::new(n)?, finest);
        let (deviation, (w1, w2)) = system.partition_deviation();
        if deviation > T::frame_tolerance() {
            return Err(Error::PartitionOfUnityViolation { deviation: deviation.as_f64(), w1, w2 });
        }
        Ok(system)
    }

    fn unchecked(grid: GridSpec, finest: FinestScale) -> Self {
        let subbands = enumerate_subbands(&grid);
        let planes: Vec<Vec<T>> = subbands.par_iter().map(|sb| spectrum_values(sb, &grid, finest)).collect();
        let spectra = planes.concat();
        Self { grid, finest, subbands, spectra, fft: Fft2::new(grid.n) }
    }

    /// Maximum of `|sum_s spectrum_s(w)^2 - 1|` over the grid and the
    /// centered frequency where it occurs.
    pub fn partition_deviation(&self) -> (T, (isize, isize)) {
        let n = self.grid.n;
        let n2 = n * n;
        let mut sums = vec![T::zero(); n2];
        for plane in self.spectra.chunks_exact(n2) {
            for (acc, &x) in sums.iter_mut().zip(plane) {
                *acc += x * x;
            }
        }
        let mut worst = (T::zero(), 0usize);
        for (i, &s) in sums.iter().enumerate() {
            let d = (s - T::one()).abs();
            if d > worst.0 || d.is_nan() {
                worst = (d, i);
            }
        }
        let (k1, k2) = (worst.1 / n, worst.1 % n);
        (worst.0, (centered_frequency(k1, n), centered_frequency(k2, n)))
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.grid.n
    }

    #[inline]
    pub fn finest_scale(&self) -> FinestScale {
        self.finest
    }

    #[inline]
    pub fn subbands(&self) -> &[SubbandIndex] {
        &self.subbands
    }

    /// Number of subbands (coefficient planes per image).
    #[inline]
    pub fn len(&self) -> usize {
        self.subbands.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.subbands.is_empty()
    }

    /// Spectrum of subband `s` in DFT order.
    #[inline]
    pub fn spectrum(&self, s: usize) -> &[T] {
        let n2 = self.grid.n * self.grid.n;
        &self.spectra[s * n2..(s + 1) * n2]
    }

    pub fn spectrum_of(&self, s: usize) -> Spectrum<T> {
        Spectrum { subband: self.subbands[s], side: self.grid.n, values: self.spectrum(s).to_vec() }
    }

    #[inline]
    pub fn fft(&self) -> &Fft2<T> {
        &self.fft
    }

    /// Whether coefficients from `other` can be synthesised by `self`.
    pub fn compatible_with(&self, grid: &GridSpec, finest: FinestScale) -> bool {
        self.grid == *grid && self.finest == finest
    }
}
