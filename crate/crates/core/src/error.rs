use thiserror::Error;

/// Errors raised by the transform and segmentation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid side {0} is below the minimum of 4")]
    GridTooSmall(usize),

    #[error("subband {subband} does not belong to a grid with j0 = {j0}")]
    SubbandMismatch { subband: String, j0: usize },

    #[error("partition of unity violated: max deviation {deviation:e} at frequency ({w1}, {w2})")]
    PartitionOfUnityViolation { deviation: f64, w1: isize, w2: isize },

    #[error("expected a square {expected}x{expected} input, got {rows}x{cols}")]
    ShapeMismatch { expected: usize, rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coefficients were produced by a different shearlet system")]
    SystemMismatch,

    #[error("imaginary residue {residue:e} exceeds tolerance after inverse DFT of subband {subband}")]
    ImaginaryResidue { residue: f64, subband: usize },

    #[error("channel mismatch: image has {image} channels, codebook has {codebook}")]
    ChannelMismatch { image: usize, codebook: usize },

    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite values in {stage} at iteration {iteration}")]
    Diverged { iteration: usize, stage: &'static str },

    #[error("conjugate gradient stalled at relative residual {residual:e} after {iterations} iterations")]
    CgNotConverged { iterations: usize, residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for failures of the numerics themselves (divergence, validation)
    /// as opposed to malformed inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PartitionOfUnityViolation { .. }
                | Error::ImaginaryResidue { .. }
                | Error::Diverged { .. }
                | Error::CgNotConverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
