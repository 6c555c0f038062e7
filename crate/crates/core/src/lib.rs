//! Translation-invariant finite discrete shearlet transform and convex
//! multi-label segmentation.
//!
//! The transform is a Parseval frame on `N x N` images computed with the
//! FFT: every subband is a real frequency window, analysis multiplies the
//! image spectrum by each window and synthesis is the adjoint. Segmentation
//! minimises `<u, s> + R(u)` over relaxed label fields with ADMM, for a
//! shearlet, total-variation or non-local regularizer `R`.
//!
//! ```
//! use shearseg::{forward, inverse, Plane, System};
//!
//! let system = System::new(16).unwrap();
//! let f = Plane::from_fn(16, |r, c| ((r * 7 + c * 3) % 5) as f64);
//! let back = inverse(&forward(&f, &system).unwrap(), &system).unwrap();
//! assert!(f.as_slice().iter().zip(back.as_slice()).all(|(a, b)| (a - b).abs() < 1e-10));
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fft;
pub mod frame;
pub mod image;
pub mod meyer;
pub mod regularizers;
mod scalar;
pub mod segmentation;
pub mod synthetic;
pub mod transform;

pub use error::{Error, Result};
pub use frame::{enumerate_subbands, FinestScale, GridSpec, ShearletSystem, SubbandIndex, SubbandKind};
pub use image::ImagePlane;
pub use regularizers::{GramStructure, LinearOp, NlParams, PeriodicGradient};
pub use scalar::Real;
pub use segmentation::{
    admm_generic, admm_shearlet, data_term, extract_labels, mislabel_rate, AdmmConfig, AdmmResult, Codebook,
    DataExponent, DataTerm, LabelField, ScaleWeights,
};
pub use transform::{forward, inverse, shift_covariance_check, Coefficients};

/// Double-precision shearlet system.
pub type System = ShearletSystem<f64>;
/// Single-precision shearlet system.
pub type SystemF32 = ShearletSystem<f32>;
pub type Coeffs = Coefficients<f64>;
pub type Plane = ImagePlane<f64>;
pub type Field = LabelField<f64>;
