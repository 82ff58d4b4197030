use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum PdmError {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The two CDF points cannot be inverted into a two-parameter distribution.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// A distribution or objective input is degenerate (e.g. all mass at zero).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Input data (traces, truths, fleets) is malformed or inconsistent.
    #[error("input error: {0}")]
    Input(String),

    /// A parameter set violates its invariants.
    #[error("config error: {0}")]
    Config(String),

    /// A numerical procedure failed to produce a usable result.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The perfect ordering policy cannot place an order at a nonnegative time.
    #[error("perfect ordering policy infeasible for unit {unit_id}: first order time would be negative")]
    InfeasiblePerfect { unit_id: String },

    /// A file could not be parsed; carries the location of the offending record.
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PdmError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        PdmError::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        PdmError::Input(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        PdmError::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, PdmError>;
