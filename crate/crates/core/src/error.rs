use thiserror::Error;

/// Errors raised by the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("sparse LU factorization failed at pivot {pivot}")]
    Factorization { pivot: usize },

    #[error("direct solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    InaccurateSolve { residual: f64, tolerance: f64 },

    #[error("non-positive viscosity {value:e} at element {element}, quadrature point {point} (phi = {phi:e})")]
    NonPositiveViscosity {
        element: usize,
        point: usize,
        value: f64,
        phi: f64,
    },

    #[error("fixed point did not converge in {iterations} iterations (last variation {last:e})")]
    NonConvergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("monitor `{name}` violated at step {step}: observed {observed:e} > bound {bound:e}")]
    MonitorViolation {
        name: String,
        step: usize,
        observed: f64,
        bound: f64,
    },

    #[error("{message} (line {line})")]
    Config { line: usize, message: String },

    #[error("missing required configuration key `{0}`")]
    MissingKey(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
