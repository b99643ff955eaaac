use thiserror::Error;

/// Errors raised by lattice construction, dynamics and recording.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("cannot renormalize ({c}, {s}): squared norm below 1e-30")]
    ZeroNorm { c: f64, s: f64 },

    #[error("lattice {width}x{height} is too small: both dimensions must be at least 3")]
    LatticeTooSmall { width: usize, height: usize },

    #[error("site ({x}, {y}) is outside the {width}x{height} lattice")]
    IndexOutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("expected {expected} sites, got {actual}")]
    SiteCountMismatch { expected: usize, actual: usize },

    #[error("site ({x}, {y}) is not normalized (c^2 + s^2 = {norm_sq})")]
    NotNormalized { x: usize, y: usize, norm_sq: f64 },

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("oracle step supports lattices up to 8x8, got {width}x{height}")]
    OracleTooLarge { width: usize, height: usize },

    #[error("step {step} is not a multiple of the sample stride {stride}")]
    StrideMisaligned { step: u64, stride: usize },

    #[error("record metadata is for a {expected_width}x{expected_height} lattice, state is {width}x{height}")]
    RecordShapeMismatch {
        expected_width: usize,
        expected_height: usize,
        width: usize,
        height: usize,
    },
}
