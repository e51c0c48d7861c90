use thiserror::Error;

pub type Result<T> = std::result::Result<T, CalError>;

#[derive(Debug, Error)]
pub enum CalError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A ratio estimator hit a zero (or non-finite) denominator.
    #[error("division by zero: {0}")]
    DivisionDomain(String),

    /// The linear constraint cannot fix the scale of the solution.
    #[error("degenerate constraint: {0}")]
    DegenerateConstraint(String),

    #[error("rank-deficient system while calibrating group {group}")]
    RankDeficient { group: usize },

    #[error("unidentifiable configuration: rows={rows} needed={needed}")]
    Unidentifiable { rows: usize, needed: usize },

    #[error("evaluation routes disagree: {0}")]
    RouteMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CalError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CalError::InvalidArgument(msg.into())
    }
}
