use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("only {found} of {needed} collapses occurred within horizon {horizon}")]
    InsufficientCollapses {
        needed: usize,
        found: usize,
        horizon: u64,
    },

    #[error("histogram is empty")]
    EmptyHistogram,

    #[error("all mass pooled into a single bin; no degrees of freedom left")]
    SingleBin,

    #[error("replication {stream_index} failed: {source}")]
    Replication {
        stream_index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
