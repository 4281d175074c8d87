use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension {required} exceeds the configured cap {cap}")]
    DimensionCap { required: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("scenario mismatch: left is {left_inputs}x{left_outputs}, right is {right_inputs}x{right_outputs}")]
    ScenarioMismatch {
        left_inputs: usize,
        left_outputs: usize,
        right_inputs: usize,
        right_outputs: usize,
    },

    #[error("eigen-solver did not converge after {iterations} iterations (off-diagonal mass {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("enumeration needs {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("classical value {0:e} too small for a ratio")]
    UndefinedRatio(f64),

    #[error("constant K = {constant} too small: completion element has eigenvalue {witness:e}")]
    InvalidConstant { constant: f64, witness: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Bell functional and POVMs come from different sign tensors")]
    ProvenanceMismatch,

    #[error("Bell operator is not positive: min eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("no acceptable draw after {attempts} attempts")]
    RetryCapExhausted { attempts: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
