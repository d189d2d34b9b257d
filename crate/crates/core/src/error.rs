use std::io;

use thiserror::Error;

/// Errors raised while configuring or running a simulation.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(
        "could not place mobile {mobile} after {retries} redraws \
         (M={mobiles}, r_ex={r_ex}, r_net={r_net}); exclusion zones too dense for the region"
    )]
    PlacementExhausted {
        mobile: usize,
        retries: u32,
        mobiles: usize,
        r_ex: f64,
        r_net: f64,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl SimError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        SimError::Config(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        SimError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
