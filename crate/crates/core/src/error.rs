use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is numerically singular (pivot {pivot:e} in column {column})")]
    Singular { pivot: f64, column: usize },

    #[error("base frequency mismatch: {0} vs {1}")]
    FrequencyMismatch(f64, f64),

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("matrix part must be constant in time for {0}")]
    NonConstantMatrix(&'static str),

    #[error("step {index} failed at t = {t}: {source}")]
    StepFailed {
        index: usize,
        t: f64,
        source: Box<Error>,
    },

    #[error("forcing frequency {omega} is within the resonance guard of natural frequency {natural}")]
    NearResonance { omega: f64, natural: f64 },

    #[error("trajectory spans {span} s but at least {required} s are required")]
    SpanTooShort { span: f64, required: f64 },

    #[error("the dimension of a sub-space with unbounded matrix order is infinite")]
    InfiniteDimension,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
