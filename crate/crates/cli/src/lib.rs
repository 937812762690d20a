//! Library side of the `scl-mon` command: trace files, generators, output
//! writers and the two experiments.

pub mod app;
pub mod config;
pub mod experiments;
pub mod generate;
pub mod output;
pub mod trace_io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Monitor(#[from] scl_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
