use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no active users: every request is served from the local cache")]
    NoActiveUsers,

    #[error("degenerate channel: zero-norm channel vector")]
    DegenerateChannel,

    #[error("ZF infeasible for user {user}: {reason}")]
    ZfInfeasible { user: usize, reason: String },

    #[error("invalid regularizer {0}: must be positive")]
    InvalidRegularizer(f64),

    #[error("expectation diverges: {0}")]
    ExpectationDiverges(String),

    #[error("optimizer domain error: non-finite objective at xi = {0}")]
    OptimizerDomain(f64),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
