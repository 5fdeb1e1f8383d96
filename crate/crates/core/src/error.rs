use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EsdgError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-admissible state (rho = {rho}, p = {p})")]
    NonAdmissible { rho: f64, p: f64 },

    #[error("non-admissible entropy variables (last component {0} must be negative)")]
    EntropyVars(f64),

    #[error("non-positive argument to logarithmic mean: ({0}, {1})")]
    LogMean(f64, f64),

    #[error("non-positive Jacobian {jac} in element {element} at point {point}")]
    Jacobian { element: usize, point: usize, jac: f64 },

    #[error("singular matrix in operator construction: {0}")]
    Singular(String),

    #[error("projected face state non-admissible in element {element}, face {face}, node {node}")]
    FaceState { element: usize, face: usize, node: usize },

    #[error("non-finite state at t = {time} (step {step})")]
    NonFinite { time: f64, step: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, EsdgError>;
