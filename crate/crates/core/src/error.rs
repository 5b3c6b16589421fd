// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = MpldError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MpldError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid layout: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("problem too large: {0}")]
    Size(String),

    #[error("component {component}: worker failed: {msg}")]
    Worker { component: usize, msg: String },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
