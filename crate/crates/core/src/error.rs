//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by problem construction, simulation, and transpilation.
#[derive(Debug, Error)]
pub enum Error {
    /// A problem definition violates one of its invariants.
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// Vector/bitstring length does not match the problem size.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// Qubit count exceeds the supported bound for the requested operation.
    #[error("{what}: n = {n} exceeds bound {max}")]
    TooLarge {
        what: &'static str,
        n: usize,
        max: usize,
    },

    /// The all-zero instance has no counterdiabatic coefficient.
    #[error("degenerate instance: all fields and couplings are zero")]
    DegenerateInstance,

    /// Time argument outside the evolution window.
    #[error("time {t} outside [0, {total}]")]
    TimeOutOfRange { t: f64, total: f64 },

    /// Schedule parameters are inconsistent.
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    /// Step selection produced no steps.
    #[error("impulse-step selection is empty")]
    EmptySelection,

    /// A gate is malformed (bad qubit indices or non-finite angle).
    #[error("malformed gate: {0}")]
    MalformedGate(String),

    /// Gate kind not supported by the requested rewrite.
    #[error("unsupported gate kind for transpilation: {0}")]
    UnsupportedGate(String),

    /// Objective returned a non-finite cost; the objective trace is preserved.
    #[error("non-finite cost after {evaluations} evaluations")]
    NonFiniteCost { evaluations: usize },

    /// Mean energy equals the minimum energy; the ratio is undefined.
    #[error("degenerate spectrum: E_avg = E_min = {0}")]
    DegenerateSpectrum(f64),

    /// Market data is unusable.
    #[error("market data: {0}")]
    MarketData(String),

    /// Text or JSON circuit parsing failed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
