use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("relative tolerance {0} is outside (0, 1)")]
    InvalidTolerance(f64),

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite")]
    Indefinite,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("relay gain is undefined: received power and relay noise are both zero")]
    ZeroGainDenominator,

    #[error("convolution length {length} cannot hold a channel with memory {max_delay}")]
    ConvLengthTooShort { length: usize, max_delay: usize },

    #[error("cyclic prefix of {n_cp} samples is shorter than the delay spread {max_delay}")]
    CpTooShort { n_cp: usize, max_delay: usize },

    #[error("noise-plus-interference covariance is singular")]
    SingularWhitening,

    #[error("artificial noise leaks into the legitimate channel: residual {residual:e} > {tolerance:e}")]
    NullityViolation { residual: f64, tolerance: f64 },

    #[error("oracle input of {len} samples exceeds the block length {max}")]
    OracleInputTooLong { len: usize, max: usize },

    #[error("sweep value {value} is outside [1, {max}]")]
    SweepValueOutOfRange { value: usize, max: usize },

    #[error("sweep grid is empty")]
    EmptyGrid,

    #[error("average legitimate SNR is zero with a positive target rate")]
    ZeroSnr,

    #[error("eavesdropper noise plus interference power is zero")]
    ZeroEveNoise,

    #[error("trial count must be at least 1")]
    NoTrials,
}

pub type Result<T> = std::result::Result<T, Error>;
