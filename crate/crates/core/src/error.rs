use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    NonConvergence,
    Guard,
    Contract,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state space: {0}")]
    StateSpace(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("negative or non-finite probability {value} at state {state}, action {action}, next {next}")]
    InvalidProbability {
        state: usize,
        action: usize,
        next: usize,
        value: f64,
    },

    #[error("transition row sum {sum} at state {state}, action {action} is not 1 within 1e-9")]
    RowSum { state: usize, action: usize, sum: f64 },

    #[error("non-finite reward at state {state}, action {action}")]
    InvalidReward { state: usize, action: usize },

    #[error("discount {0} outside [0, 1)")]
    InvalidDiscount(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("action {action} invalid at state {state} (model has {num_actions} actions)")]
    InvalidAction {
        state: usize,
        action: usize,
        num_actions: usize,
    },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("size guard exceeded: {what} = {size} > {limit}")]
    Guard {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("joint action {action:?} infeasible at step {step}: {reason}")]
    InfeasibleAction {
        step: usize,
        action: Vec<usize>,
        reason: String,
    },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("missing index entry for arm {arm}, state {state}, level {level}")]
    MissingIndex { arm: usize, state: usize, level: usize },

    #[error("indexability not certified: {0}")]
    NotCertified(String),

    #[error("non-indexable evidence at W = {subsidy}: state {state} {detail}")]
    NonIndexable {
        subsidy: f64,
        state: usize,
        detail: String,
    },

    #[error("inconclusive indexability check: {0}")]
    Inconclusive(String),

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("config field `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NonConvergence { .. } => ErrorKind::NonConvergence,
            Error::Guard { .. } => ErrorKind::Guard,
            Error::ConfigParse(_) | Error::ConfigInvalid { .. } => ErrorKind::Config,
            Error::Io { .. } => ErrorKind::Io,
            _ => ErrorKind::Contract,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
