use thiserror::Error;

use crate::fd_solver::NonConvergence;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function it was passed to.
    #[error("domain error: {0}")]
    Domain(String),

    /// A problem description failed validation.
    #[error("invalid problem: {0}")]
    InvalidSpec(String),

    /// The estimate harness was handed data from the wrong regularity regime.
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("{0}")]
    NonConvergence(Box<NonConvergence>),

    /// Closed-form profile requested on a configuration without a bounded radial solution.
    #[error("no bounded radial solution: {0}")]
    Nonexistence(String),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
