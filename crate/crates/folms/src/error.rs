use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Requested sample time falls outside the window where the
    /// interpolation kernel has full support. Never silently zero-padded.
    #[error("sample time {t} outside interpolable range [{min}, {max}]")]
    OutOfRange { t: f64, min: f64, max: f64 },

    /// Instantaneous error power crossed the divergence threshold.
    #[error("run diverged at iteration {iteration}: |e|^2 = {error_power:.3e} > {threshold:.3e}")]
    Diverged {
        iteration: usize,
        error_power: f64,
        threshold: f64,
    },

    /// No step-size triple with a positive stability margin exists in the
    /// search box.
    #[error("no step sizes with positive stability margin found in the search box")]
    Infeasible,

    #[error("all {0} replicas diverged")]
    AllReplicasDiverged(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
