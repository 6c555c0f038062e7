//! Forward (analysis) and inverse (synthesis) shearlet transform.
//!
//! Analysis filters `f^` by every subband spectrum and returns to the pixel
//! domain; synthesis is the adjoint. Since the squared spectra sum to one,
//! synthesis after analysis is the identity.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{FinestScale, GridSpec, ShearletSystem, SubbandIndex};
use crate::image::{circshift_slice, ImagePlane};
use crate::regularizers::{GramStructure, LinearOp};
use crate::Real;

/// Coefficient planes of one image, in the generating system's subband order.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients<T> {
    grid: GridSpec,
    finest: FinestScale,
    subbands: Vec<SubbandIndex>,
    /// `eta * N^2`, subband-major, row-major planes.
    planes: Vec<T>,
}

impl<T: Real> Coefficients<T> {
    /// Assemble coefficients from raw planes, e.g. when reading a dump.
    pub fn from_planes(
        grid: GridSpec,
        finest: FinestScale,
        subbands: Vec<SubbandIndex>,
        planes: Vec<T>,
    ) -> Result<Self> {
        let n2 = grid.side() * grid.side();
        if subbands.len() != grid.subband_count() {
            return Err(Error::DimensionMismatch { expected: grid.subband_count(), got: subbands.len() });
        }
        if planes.len() != n2 * subbands.len() {
            return Err(Error::DimensionMismatch { expected: n2 * subbands.len(), got: planes.len() });
        }
        Ok(Self { grid, finest, subbands, planes })
    }

    pub fn zeros(system: &ShearletSystem<T>) -> Self {
        let n = system.side();
        Self {
            grid: *system.grid(),
            finest: system.finest_scale(),
            subbands: system.subbands().to_vec(),
            planes: vec![T::zero(); system.len() * n * n],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn finest_scale(&self) -> FinestScale {
        self.finest
    }

    pub fn subbands(&self) -> &[SubbandIndex] {
        &self.subbands
    }

    pub fn len(&self) -> usize {
        self.subbands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subbands.is_empty()
    }

    pub fn plane(&self, s: usize) -> &[T] {
        let n2 = self.grid.side() * self.grid.side();
        &self.planes[s * n2..(s + 1) * n2]
    }

    pub fn plane_mut(&mut self, s: usize) -> &mut [T] {
        let n2 = self.grid.side() * self.grid.side();
        &mut self.planes[s * n2..(s + 1) * n2]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.planes
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.planes
    }

    /// Sum of squares over every plane and pixel.
    pub fn norm_sqr(&self) -> T {
        T::lit(self.planes.iter().map(|&x| x.as_f64() * x.as_f64()).sum())
    }
}

fn residue_tolerance<T: Real>() -> T {
    T::lit(1e-8).max(T::epsilon() * T::lit(1e4))
}

/// Real part of an inverse DFT after checking the imaginary residue against
/// `tol * max(|re|_inf, reference)`.
fn take_real<T: Real>(buf: &[Complex<T>], out: &mut [T], reference: T, subband: usize) -> Result<()> {
    let mut re_max = T::zero();
    let mut im_max = T::zero();
    for (o, z) in out.iter_mut().zip(buf) {
        *o = z.re;
        re_max = re_max.max(z.re.abs());
        im_max = im_max.max(z.im.abs());
    }
    let scale = re_max.max(reference);
    if im_max > residue_tolerance::<T>() * scale {
        return Err(Error::ImaginaryResidue { residue: (im_max / scale).as_f64(), subband });
    }
    Ok(())
}

impl<T: Real> ShearletSystem<T> {
    /// Analysis on a raw row-major `N^2` buffer, writing `eta * N^2` values.
    pub fn analyze_into(&self, image: &[T], out: &mut [T]) -> Result<()> {
        let n2 = self.side() * self.side();
        if image.len() != n2 {
            return Err(Error::DimensionMismatch { expected: n2, got: image.len() });
        }
        if out.len() != n2 * self.len() {
            return Err(Error::DimensionMismatch { expected: n2 * self.len(), got: out.len() });
        }
        let fhat = self.fft().forward_real(image)?;
        let reference = image.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        out.par_chunks_exact_mut(n2).enumerate().try_for_each(|(s, plane)| {
            let mut buf: Vec<Complex<T>> = fhat.iter().zip(self.spectrum(s)).map(|(&z, &w)| z * w).collect();
            self.fft().inverse(&mut buf)?;
            take_real(&buf, plane, reference, s)
        })
    }

    /// Synthesis (adjoint of analysis) from `eta * N^2` coefficients into an `N^2` buffer.
    pub fn synthesize_into(&self, coeffs: &[T], out: &mut [T]) -> Result<()> {
        let n2 = self.side() * self.side();
        if coeffs.len() != n2 * self.len() {
            return Err(Error::DimensionMismatch { expected: n2 * self.len(), got: coeffs.len() });
        }
        if out.len() != n2 {
            return Err(Error::DimensionMismatch { expected: n2, got: out.len() });
        }
        let zero = Complex::new(T::zero(), T::zero());
        let fhat = coeffs
            .par_chunks_exact(n2)
            .enumerate()
            .try_fold(
                || vec![zero; n2],
                |mut acc, (s, plane)| -> Result<Vec<Complex<T>>> {
                    let chat = self.fft().forward_real(plane)?;
                    for ((a, c), &w) in acc.iter_mut().zip(&chat).zip(self.spectrum(s)) {
                        *a += c * w;
                    }
                    Ok(acc)
                },
            )
            .try_reduce(
                || vec![zero; n2],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(&b) {
                        *x += y;
                    }
                    Ok(a)
                },
            )?;
        let mut buf = fhat;
        self.fft().inverse(&mut buf)?;
        let reference = coeffs.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        take_real(&buf, out, reference, usize::MAX)
    }

    fn check_image(&self, f: &ImagePlane<T>) -> Result<()> {
        if f.side() != self.side() {
            return Err(Error::ShapeMismatch { expected: self.side(), rows: f.side(), cols: f.side() });
        }
        Ok(())
    }
}

/// Shearlet coefficients of `f`: plane `s` at pixel `m` is `<f, psi_{s,m}>`.
pub fn forward<T: Real>(f: &ImagePlane<T>, system: &ShearletSystem<T>) -> Result<Coefficients<T>> {
    system.check_image(f)?;
    let mut c = Coefficients::zeros(system);
    system.analyze_into(f.as_slice(), c.as_mut_slice())?;
    Ok(c)
}

/// Synthesis from coefficients; inverts [`forward`].
pub fn inverse<T: Real>(c: &Coefficients<T>, system: &ShearletSystem<T>) -> Result<ImagePlane<T>> {
    if !system.compatible_with(c.grid(), c.finest_scale()) || c.subbands() != system.subbands() {
        return Err(Error::SystemMismatch);
    }
    let mut out = ImagePlane::zeros(system.side());
    system.synthesize_into(c.as_slice(), out.as_mut_slice())?;
    Ok(out)
}

/// Largest deviation between transforming a shifted image and shifting every
/// coefficient plane of the transform.
pub fn shift_covariance_check<T: Real>(
    f: &ImagePlane<T>,
    shift: (isize, isize),
    system: &ShearletSystem<T>,
) -> Result<T> {
    let shifted = forward(&f.circshift(shift.0, shift.1), system)?;
    let base = forward(f, system)?;
    let n = system.side();
    let mut worst = T::zero();
    for s in 0..system.len() {
        let moved = circshift_slice(base.plane(s), n, shift.0, shift.1);
        for (a, b) in moved.iter().zip(shifted.plane(s)) {
            worst = worst.max((*a - *b).abs());
        }
    }
    Ok(worst)
}

impl<T: Real> LinearOp<T> for ShearletSystem<T> {
    fn input_dim(&self) -> usize {
        self.side() * self.side()
    }

    fn output_dim(&self) -> usize {
        self.len() * self.side() * self.side()
    }

    fn apply(&self, x: &[T], out: &mut [T]) -> Result<()> {
        self.analyze_into(x, out)
    }

    fn apply_adjoint(&self, y: &[T], out: &mut [T]) -> Result<()> {
        self.synthesize_into(y, out)
    }

    fn gram_structure(&self) -> GramStructure<T> {
        GramStructure::IdentityMultiple(T::one())
    }
}
