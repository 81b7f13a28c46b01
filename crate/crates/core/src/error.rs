use std::path::PathBuf;

use crate::config::{Infeasible, SchemeId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{scheme} infeasible: {reason}")]
    Infeasible { scheme: SchemeId, reason: Infeasible },

    #[error("pilot length {tau_p} too short, need at least {required}")]
    PilotTooShort { tau_p: usize, required: usize },

    #[error("pilot length {tau_p} leaves no data symbols in a coherence interval of {coherence}")]
    PilotTooLong { tau_p: usize, coherence: usize },

    #[error("expected {expected} {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{scheme} needs {expected} pilot gammas / power layout")]
    PilotStrategyMismatch {
        scheme: SchemeId,
        expected: &'static str,
    },

    #[error("column {column} has zero estimate variance but {power} allocated power")]
    ZeroEstimate { column: usize, power: f64 },

    #[error("matrix is singular to working precision (condition number {condition:e})")]
    Singular { condition: f64 },

    #[error("bisection did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no scheme is feasible for this configuration")]
    NothingFeasible,

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}
