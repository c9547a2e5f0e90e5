use thiserror::Error;

/// Errors raised by the engines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice size L={0}: need L >= 2")]
    InvalidSize(usize),

    #[error("{kind} index {index} out of range (len {len})")]
    Index {
        kind: &'static str,
        index: usize,
        len: usize,
    },

    #[error("degenerate path: endpoints coincide at vertex {0}")]
    DegeneratePath(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("scope exceeded: {0}")]
    ScopeExceeded(String),

    #[error("insufficient data: {got} samples, need at least {need}")]
    InsufficientData { got: usize, need: usize },

    #[error("reweighting failure: effective sample size {ess:.1} of {n} samples (need {min_fraction} fraction)")]
    ReweightingFailure {
        ess: f64,
        n: usize,
        min_fraction: f64,
    },

    #[error("no classification: {0}")]
    NoReport(String),

    #[error("decode error: {0}")]
    Decode(String),

    #[error("config error for key `{key}`: {msg}")]
    Config { key: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
