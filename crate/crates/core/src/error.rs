use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Grid sizes, periods or lengths do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// An argument lies outside the region where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// Not enough samples to form the requested quadrature.
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    /// The requested accuracy cannot be met with the available budget.
    #[error("accuracy budget exceeded: {0}")]
    Accuracy(String),
    #[error("invalid value: {0}")]
    Invalid(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// The solution left the representable range.
    #[error("numerical divergence at t = {time}")]
    Divergence { time: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
