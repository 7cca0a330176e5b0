use thiserror::Error;

/// Errors raised by the estimators, models and harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid perturbation kernel: {0}")]
    InvalidKernel(String),

    #[error("scale parameter must be strictly positive, got {0}")]
    InvalidScale(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for dimension {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("need at least {required} samples, got {found}")]
    InsufficientSamples { required: usize, found: usize },

    #[error("degenerate posterior: every log-weight is -inf (is tau mis-scaled?)")]
    DegeneratePosterior,

    #[error("non-finite evaluation at {context}")]
    NonFiniteEvaluation { context: String },

    #[error("quadrature supports dimension <= {max}, got {found}")]
    UnsupportedDimension { max: usize, found: usize },

    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),

    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),

    #[error("observation sequence must contain at least one time step")]
    EmptyObservations,

    #[error("particle collapse at step {step}: all weights are zero")]
    ParticleCollapse { step: usize },

    #[error("resampling weights must be non-negative with positive sum")]
    InvalidWeights,

    #[error("invalid filter configuration: {0}")]
    InvalidFilterConfig(String),

    #[error("accumulator incomplete: {0}")]
    IncompleteAccumulator(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("slope fit needs at least {required} distinct x values, got {found}")]
    TooFewPoints { required: usize, found: usize },

    #[error("csv parse error on line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
