use thiserror::Error;

/// Errors raised by the bound calculators, samplers and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("truncation level must be positive, got {0}")]
    NonPositiveTruncation(f64),

    #[error("{name} must be nonnegative, got {value}")]
    NegativeInput { name: &'static str, value: f64 },

    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("third absolute moment is infinite; use theorem1_bound with an explicit truncation level")]
    InfiniteGamma,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {index} out of range for dimension {dimension}")]
    CoordinateOutOfRange { index: usize, dimension: usize },

    #[error("derivative order must be 1, 2 or 3, got {0}")]
    InvalidOrder(usize),

    #[error("empty point set")]
    EmptyPointSet,

    #[error("empty function family")]
    EmptyFamily,

    #[error("at least {min} replicates required, got {got}")]
    TooFewReplicates { min: usize, got: usize },

    #[error("finite-difference stencil leaves the domain ({lo}, {hi}) at x = {x}")]
    StencilOutsideDomain { x: f64, lo: f64, hi: f64 },

    #[error("smoothing parameter alpha must be at least 1, got {0}")]
    AlphaBelowOne(f64),

    #[error("spectral parameter must have nonzero imaginary part")]
    RealSpectralParameter,

    #[error("singular resolvent factorization")]
    SingularResolvent,

    #[error("enumeration over 2^{n} configurations exceeds the limit of 2^{max}")]
    EnumerationTooLarge { n: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot parse distribution spec {0:?}")]
    ParseDistribution(String),

    #[error("quadrature failed to converge: estimated error {error:e} for value {value:e}")]
    QuadratureDiverged { value: f64, error: f64 },

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_nan() || value < 0.0 {
        Err(Error::NegativeInput { name, value })
    } else {
        Ok(value)
    }
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}
