use alloc::string::String;

/// Errors raised by the kernels, problems and solvers in this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("step {step} is past the schedule horizon {horizon}")]
    HorizonExceeded { step: usize, horizon: usize },

    #[error("dual step recursion produced eta = {eta} at step {step}")]
    NonPositiveEta { step: usize, eta: f64 },

    #[error("divergence at iteration {iteration}: {reason}")]
    Divergence { iteration: usize, reason: String },

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    #[error("data error at line {line}: {message}")]
    Data { line: usize, message: String },

    #[error("memory budget exceeded: {requested} entries requested, budget {budget}")]
    MemoryBudget { requested: usize, budget: usize },

    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure_finite(values: &[f64], context: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { context })
    }
}

pub(crate) fn ensure_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}
