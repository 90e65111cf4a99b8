use std::io;

use thiserror::Error;

/// Errors raised anywhere in the homogenization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("malformed grid file: {0}")]
    Format(String),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
