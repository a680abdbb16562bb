use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("image {height}x{width} is smaller than the {window}x{window} window")]
    ImageTooSmall { height: usize, width: usize, window: usize },
    #[error("layer {0} outside 1..={max}", max = crate::geometry::MAX_LAYERS)]
    LayerOutOfRange(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown phantom kind `{0}`")]
    UnknownPhantom(String),
    #[error("empty patch")]
    EmptyPatch,
    #[error("relative error undefined: reference has zero norm")]
    ZeroNorm,
    #[error("non-finite energy after outer iteration {iteration}")]
    Diverged { iteration: usize },
    #[error("conjugate gradient residual became non-finite at iteration {iteration}")]
    CgBreakdown { iteration: usize },
}
