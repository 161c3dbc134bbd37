//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("time grids do not match: {0}")]
    GridMismatch(String),

    #[error("band [{lo} Hz, {hi} Hz] not representable at sample rate {sample_rate} Hz")]
    BandOutOfRange { lo: f64, hi: f64, sample_rate: f64 },

    #[error("polarization precondition violated: {0}")]
    Polarization(String),

    #[error("no peak above the noise floor")]
    NoPeak,

    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn in_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}
