use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid payoff matrix: {0}")]
    InvalidPayoffs(String),

    #[error("cooperation probability {0} is outside [0, 1]")]
    InvalidRho(f64),

    #[error("memory ratio {0} is outside [0, 1]")]
    InvalidMu(f64),

    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    #[error("unknown strategy {0:?} (expected one of FR, FMC, FMD, FMU, FLP, FMP)")]
    UnknownStrategy(String),

    #[error("group selects no agents")]
    EmptyGroup,

    /// The population earned nothing, so a payoff ratio is undefined.
    #[error("payoff ratio is undefined: population mean payoff is zero")]
    DegenerateRatio,

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("malformed config: {0}")]
    ConfigSyntax(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn config(key: &str, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }
}
