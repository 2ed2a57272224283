use thiserror::Error;

pub type Result<T> = std::result::Result<T, IsacError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IsacError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// An iterative method failed, or a result drifted outside its range.
    #[error("numeric failure in {op}: {detail}")]
    Numeric { op: &'static str, detail: String },

    /// The power split makes a closed form singular (e.g. zero communication
    /// power in a communication-interfered detector).
    #[error("singular configuration in {op}: {detail}")]
    Singular { op: &'static str, detail: String },

    #[error("invalid QoS targets: {0}")]
    InvalidTargets(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl IsacError {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        IsacError::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn numeric(op: &'static str, detail: impl Into<String>) -> Self {
        IsacError::Numeric {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn singular(op: &'static str, detail: impl Into<String>) -> Self {
        IsacError::Singular {
            op,
            detail: detail.into(),
        }
    }
}
