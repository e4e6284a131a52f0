use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every way a laboratory operation can refuse its input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("under-resolved bump: radius {radius} must exceed 4*dx = {min_radius}")]
    UnderResolved { radius: f64, min_radius: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infrared singularity: {0}")]
    InfraredSingular(String),

    #[error("time span {span} exceeds the boundary margin L/4 = {limit}")]
    TimeBeyondMargin { span: f64, limit: f64 },

    #[error("unstable step: {0}")]
    Unstable(String),

    #[error("time span {span} is not a positive integer multiple of dt = {dt}")]
    NonMultipleTime { span: f64, dt: f64 },

    #[error("exponential weight overflow at q = {q}")]
    WeightOverflow { q: f64 },

    #[error("quadrature not converged: residual {residual:e} above tolerance {tolerance:e}")]
    NotConverged { residual: f64, tolerance: f64 },

    #[error("tail fit rejected: {0}")]
    FitRejected(String),

    #[error("field has zero total norm")]
    ZeroNorm,

    #[error("config field `{field}`: {rule}")]
    Config { field: String, rule: String },

    #[error("io: {0}")]
    Io(String),

    #[error("malformed data: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            rule: rule.into(),
        }
    }

    /// Short machine-readable tag, used in the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::NonFinite { .. } => "non_finite",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::UnderResolved { .. } => "under_resolved",
            Error::Precondition(_) => "precondition",
            Error::InfraredSingular(_) => "infrared_singular",
            Error::TimeBeyondMargin { .. } => "time_beyond_margin",
            Error::Unstable(_) => "unstable",
            Error::NonMultipleTime { .. } => "non_multiple_time",
            Error::WeightOverflow { .. } => "weight_overflow",
            Error::NotConverged { .. } => "not_converged",
            Error::FitRejected(_) => "fit_rejected",
            Error::ZeroNorm => "zero_norm",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
            Error::Format(_) => "format",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
