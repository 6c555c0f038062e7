//! Difference operators for the comparison regularizers.
//!
//! Both the periodic gradient and the non-local graph operator implement
//! [`LinearOp`], which is what the generic ADMM solver consumes. The shearlet
//! system implements it too (with an identity Gram matrix).

mod gradient;
mod nonlocal;

pub use gradient::PeriodicGradient;
pub use nonlocal::{build_nl_graph, patch_distance, NlGraph, NlOperator, NlParams, PatchKernel};

use crate::error::Result;
use crate::Real;

/// Structure of `D^T D`, which decides how the solver inverts `I + D^T D`.
#[derive(Debug, Clone, PartialEq)]
pub enum GramStructure<T> {
    /// `D^T D = c I`.
    IdentityMultiple(T),
    /// `D^T D` is diagonalised by the 2-D DFT of an `N x N` grid; eigenvalues in DFT order.
    DftDiagonal(Vec<T>),
    General,
}

/// A real linear map with its adjoint.
///
/// `output_dim` is a whole number of "directions" times `input_dim`; the
/// output is laid out direction-major.
pub trait LinearOp<T: Real>: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn apply(&self, x: &[T], out: &mut [T]) -> Result<()>;
    fn apply_adjoint(&self, y: &[T], out: &mut [T]) -> Result<()>;
    fn gram_structure(&self) -> GramStructure<T>;

    fn directions(&self) -> usize {
        self.output_dim() / self.input_dim()
    }
}

/// Per-pixel Euclidean norm across every label and every difference
/// direction of a stacked `(I_q ⊗ D) u`, laid out `[label][direction][pixel]`.
pub fn coupled_group_norm<T: Real>(v: &[T], labels: usize, pixels: usize) -> Vec<T> {
    let mut acc = vec![T::zero(); pixels];
    if pixels == 0 || labels == 0 {
        return acc;
    }
    for chunk in v.chunks_exact(pixels) {
        for (a, &x) in acc.iter_mut().zip(chunk) {
            *a += x * x;
        }
    }
    debug_assert_eq!(v.len() % (labels * pixels), 0);
    acc.iter_mut().for_each(|a| *a = a.sqrt());
    acc
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_norms() {
        assert_eq!(coupled_group_norm(&[0.0f64; 8], 2, 2), vec![0.0, 0.0]);
        // one label, two directions, two pixels: value 3 at pixel 1
        assert_eq!(coupled_group_norm(&[0.0f64, 3.0, 0.0, 0.0], 1, 2), vec![0.0, 3.0]);
        // q = 2, one direction, one pixel: layers hold 3 and 4
        assert_eq!(coupled_group_norm(&[3.0f64, 4.0], 2, 1), vec![5.0]);
    }

    #[test]
    fn shearlet_system_is_adjoint_consistent() {
        let sys = crate::ShearletSystem::<f64>::new(16).unwrap();
        assert!(probe::adjoint_mismatch(&sys, 3) < 1e-10);
        assert_eq!(sys.directions(), sys.len());
    }
}
