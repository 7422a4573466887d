//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Scenario parameters violate an invariant (e.g. M does not divide K).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An argument is outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A root finder found no sign change on its bracket.
    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    /// An asymptotic formula was evaluated outside its validity region.
    #[error("validity guard failed: {0}")]
    Validity(String),

    /// A quantile or estimate was requested from too few observations.
    #[error("insufficient samples: needed {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    /// Every trial of a diagnostic run had fewer than two active links.
    #[error("no trial produced at least two active links")]
    NoActiveLinks,

    /// A series evaluation did not converge within the configured term budget.
    #[error("series did not converge within {max_terms} terms at x = {x}")]
    SeriesDivergence { x: f64, max_terms: usize },

    /// A link index or vector length does not match the realization.
    #[error("index error: {0}")]
    Index(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
