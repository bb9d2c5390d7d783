use std::path::PathBuf;

/// Errors raised anywhere in the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("driver out of domain: {0}")]
    DriverDomain(String),

    #[error("initialization error: {0}")]
    Init(String),

    #[error("year {year}: {source}")]
    Step { year: i32, source: Box<Error> },

    #[error("run with seed {seed} failed: {source}")]
    Run { seed: u64, source: Box<Error> },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("run complete: {0} is the final simulated year")]
    RunComplete(i32),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("budget error: {0}")]
    Budget(String),

    #[error("{}: {msg}", path.display())]
    Parse { path: PathBuf, msg: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// Process exit code: 2 configuration, 3 runtime model error, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::Budget(_) => 2,
            Error::Io { .. } => 4,
            Error::Step { source, .. } | Error::Run { source, .. } => match source.as_ref() {
                Error::Io { .. } => 4,
                _ => 3,
            },
            Error::DriverDomain(_)
            | Error::Init(_)
            | Error::Invariant(_)
            | Error::RunComplete(_)
            | Error::Fit(_) => 3,
        }
    }
}
