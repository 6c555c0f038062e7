//! Two-dimensional DFT with the normalisation used throughout the crate:
//! unnormalised forward transform, `1/N^2` on the inverse so that
//! `<f, g> = <F f, F g> / N^2`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::Real;

/// Planned forward and inverse `N x N` transforms. Cheap to clone and shareable across threads.
#[derive(Clone)]
pub struct Fft2<T: Real> {
    side: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for Fft2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2").field("side", &self.side).finish()
    }
}

impl<T: Real> Fft2<T> {
    pub fn new(side: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { side, forward: planner.plan_fft_forward(side), inverse: planner.plan_fft_inverse(side) }
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    /// In-place unnormalised forward DFT of a row-major `N x N` buffer.
    pub fn forward(&self, buf: &mut [Complex<T>]) -> Result<()> {
        self.check(buf)?;
        self.run(buf, &*self.forward);
        Ok(())
    }

    /// In-place inverse DFT including the `1/N^2` factor.
    pub fn inverse(&self, buf: &mut [Complex<T>]) -> Result<()> {
        self.check(buf)?;
        self.run(buf, &*self.inverse);
        let scale = T::one() / T::of_usize(self.side * self.side);
        for z in buf.iter_mut() {
            *z *= scale;
        }
        Ok(())
    }

    /// Forward DFT of a real image.
    pub fn forward_real(&self, data: &[T]) -> Result<Vec<Complex<T>>> {
        let mut buf: Vec<Complex<T>> = data.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.forward(&mut buf)?;
        Ok(buf)
    }

    fn check(&self, buf: &[Complex<T>]) -> Result<()> {
        let n2 = self.side * self.side;
        if buf.len() != n2 {
            return Err(Error::DimensionMismatch { expected: n2, got: buf.len() });
        }
        Ok(())
    }

    fn run(&self, buf: &mut [Complex<T>], fft: &dyn Fft<T>) {
        let n = self.side;
        let mut scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        // rows
        for row in buf.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut scratch);
        }
        // columns, via a transposed copy
        let mut cols = transpose(buf, n);
        for col in cols.chunks_exact_mut(n) {
            fft.process_with_scratch(col, &mut scratch);
        }
        for r in 0..n {
            for c in 0..n {
                buf[c * n + r] = cols[r * n + c];
            }
        }
    }
}

fn transpose<T: Copy>(buf: &[T], n: usize) -> Vec<T> {
    let mut out = buf.to_vec();
    for r in 0..n {
        for c in 0..n {
            out[c * n + r] = buf[r * n + c];
        }
    }
    out
}

/// Unnormalised forward DFT of a `rows x cols` complex array; only square inputs are accepted.
pub fn dft2<T: Real>(data: &[Complex<T>], rows: usize, cols: usize) -> Result<Vec<Complex<T>>> {
    square(data, rows, cols)?;
    let mut buf = data.to_vec();
    Fft2::new(rows).forward(&mut buf)?;
    Ok(buf)
}

/// `1/N^2`-normalised inverse DFT; only square inputs are accepted.
pub fn idft2<T: Real>(data: &[Complex<T>], rows: usize, cols: usize) -> Result<Vec<Complex<T>>> {
    square(data, rows, cols)?;
    let mut buf = data.to_vec();
    Fft2::new(rows).inverse(&mut buf)?;
    Ok(buf)
}

fn square<T>(data: &[T], rows: usize, cols: usize) -> Result<()> {
    if rows != cols {
        return Err(Error::ShapeMismatch { expected: rows.max(cols), rows, cols });
    }
    if data.len() != rows * cols {
        return Err(Error::DimensionMismatch { expected: rows * cols, got: data.len() });
    }
    Ok(())
}

/// Centered frequency for DFT index `k`: `k` below `ceil(N/2)`, `k - N` otherwise.
/// Maps `0..N` onto `{-floor(N/2), ..., ceil(N/2) - 1}`.
#[inline]
pub fn centered_frequency(k: usize, n: usize) -> isize {
    if k < n.div_ceil(2) {
        k as isize
    } else {
        k as isize - n as isize
    }
}

/// DFT index of the centered frequency `w`.
#[inline]
pub fn dft_index(w: isize, n: usize) -> usize {
    w.rem_euclid(n as isize) as usize
}
