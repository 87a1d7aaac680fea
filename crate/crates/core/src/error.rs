use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid shape {height}x{width}x{channels} (each dimension must be at least 3)")]
    InvalidShape {
        height: usize,
        width: usize,
        channels: usize,
    },
    #[error("{what}: expected {expected} values, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },
    #[error("variant {variant} requires {expected} padding")]
    PaddingMismatch {
        variant: &'static str,
        expected: &'static str,
    },
    #[error("{what} must be strictly positive and finite, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("state became non-finite during step {step}")]
    Diverged { step: u64 },
    #[error("rk4 integration requires the stochastic update mask to be off")]
    MaskedRk4,
    #[error("fixed-point search is undefined for positional-encoding rules")]
    PositionalFixedPoint,
}
