//! Square single-channel images in row-major order.

use crate::error::{Error, Result};
use crate::Real;

/// An `N x N` real image. Pixel `(m1, m2)` lives at `m1 * N + m2`; `m1`
/// pairs with the first frequency coordinate `w1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane<T> {
    side: usize,
    data: Vec<T>,
}

impl<T: Real> ImagePlane<T> {
    pub fn new(side: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != side * side {
            return Err(Error::DimensionMismatch { expected: side * side, got: data.len() });
        }
        Ok(Self { side, data })
    }

    pub fn zeros(side: usize) -> Self {
        Self { side, data: vec![T::zero(); side * side] }
    }

    pub fn filled(side: usize, value: T) -> Self {
        Self { side, data: vec![value; side * side] }
    }

    pub fn from_fn(side: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(side * side);
        for r in 0..side {
            for c in 0..side {
                data.push(f(r, c));
            }
        }
        Self { side, data }
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.side + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: T) {
        self.data[r * self.side + c] = value;
    }

    /// Squared Euclidean norm.
    pub fn norm_sqr(&self) -> T {
        T::lit(self.data.iter().map(|&x| x.as_f64() * x.as_f64()).sum())
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// Circular shift: output pixel `(r + dr, c + dc)` mod N takes input `(r, c)`.
    pub fn circshift(&self, dr: isize, dc: isize) -> Self {
        Self { side: self.side, data: circshift_slice(&self.data, self.side, dr, dc) }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Circular shift of a row-major `n x n` buffer.
pub fn circshift_slice<T: Copy>(data: &[T], n: usize, dr: isize, dc: isize) -> Vec<T> {
    let ni = n as isize;
    let (dr, dc) = (dr.rem_euclid(ni) as usize, dc.rem_euclid(ni) as usize);
    let mut out = data.to_vec();
    for r in 0..n {
        let rr = (r + dr) % n;
        for c in 0..n {
            out[rr * n + (c + dc) % n] = data[r * n + c];
        }
    }
    out
}
