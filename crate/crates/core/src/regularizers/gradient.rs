use crate::error::{Error, Result};
use crate::regularizers::{GramStructure, LinearOp};
use crate::Real;

/// Forward differences with periodic boundaries on an `N x N` grid.
///
/// Output direction 0 differences along columns (`x[r][c+1] - x[r][c]`),
/// direction 1 along rows (`x[r+1][c] - x[r][c]`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicGradient {
    side: usize,
}

impl PeriodicGradient {
    pub fn new(side: usize) -> Self {
        Self { side }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    fn check(&self, x: usize, out: usize, x_len: usize, out_len: usize) -> Result<()> {
        if x != x_len {
            return Err(Error::DimensionMismatch { expected: x_len, got: x });
        }
        if out != out_len {
            return Err(Error::DimensionMismatch { expected: out_len, got: out });
        }
        Ok(())
    }
}

impl<T: Real> LinearOp<T> for PeriodicGradient {
    fn input_dim(&self) -> usize {
        self.side * self.side
    }

    fn output_dim(&self) -> usize {
        2 * self.side * self.side
    }

    fn apply(&self, x: &[T], out: &mut [T]) -> Result<()> {
        let n = self.side;
        let n2 = n * n;
        self.check(x.len(), out.len(), n2, 2 * n2)?;
        let (dc, dr) = out.split_at_mut(n2);
        for r in 0..n {
            let rn = (r + 1) % n;
            for c in 0..n {
                let here = x[r * n + c];
                dc[r * n + c] = x[r * n + (c + 1) % n] - here;
                dr[r * n + c] = x[rn * n + c] - here;
            }
        }
        Ok(())
    }

    fn apply_adjoint(&self, y: &[T], out: &mut [T]) -> Result<()> {
        let n = self.side;
        let n2 = n * n;
        self.check(out.len(), y.len(), n2, 2 * n2)?;
        let (dc, dr) = y.split_at(n2);
        for r in 0..n {
            let rp = (r + n - 1) % n;
            for c in 0..n {
                let cp = (c + n - 1) % n;
                out[r * n + c] = dc[r * n + cp] - dc[r * n + c] + dr[rp * n + c] - dr[r * n + c];
            }
        }
        Ok(())
    }

    /// Eigenvalues `4 - 2 cos(2 pi k1 / N) - 2 cos(2 pi k2 / N)` of the periodic Laplacian.
    fn gram_structure(&self) -> GramStructure<T> {
        let n = self.side;
        let tau = T::lit(2.0) * T::PI() / T::of_usize(n);
        let ring: Vec<T> = (0..n).map(|k| T::lit(2.0) - T::lit(2.0) * (tau * T::of_usize(k)).cos()).collect();
        let mut eig = Vec::with_capacity(n * n);
        for a in &ring {
            for b in &ring {
                eig.push(*a + *b);
            }
        }
        GramStructure::DftDiagonal(eig)
    }
}
