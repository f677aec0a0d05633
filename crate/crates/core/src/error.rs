use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value outside the domain of an operation (nonpositive size, bad exponent, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    /// JSON input that does not conform to a schema; `path` points into the document.
    #[error("parse error at {path}: {msg}")]
    Parse { path: String, msg: String },

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("zero modulus: {0}")]
    ZeroModulus(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("exact mode unavailable: {0}")]
    ExactUnavailable(String),

    #[error("plan error: {0}")]
    Plan(String),

    #[error("incompatible section at location {location}: {msg}")]
    IncompatibleSection { location: String, msg: String },

    #[error("map is not measure compatible at edge {edge}: {msg}")]
    MeasureIncompatible { edge: String, msg: String },

    #[error("chart error: {0}")]
    Chart(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
