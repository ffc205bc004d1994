use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("shape mismatch: expected {expected} samples, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("non-finite sample at node {0}")]
    NonFinite(usize),
    #[error("profile violates the Dirichlet condition u(r_max) = 0 (got {0})")]
    Dirichlet(f64),
    #[error("invalid exponent {0}")]
    InvalidExponent(f64),
    #[error("invalid scale factor {0}")]
    InvalidScale(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("trivial function: the nonlinear term vanishes")]
    TrivialFunction,
    #[error("degenerate fiber: all positive coefficients vanish")]
    DegenerateFiber,
    #[error("flat fiber: no interior maximum found")]
    FlatFiber,
    #[error("fiber derivative changes sign {0} times")]
    MultipleCriticalPoints(usize),
    #[error("incomplete potential: {0}")]
    IncompleteSpec(&'static str),
    #[error("no convergence after {iterations} iterations (best value {best})")]
    ConvergenceFailure { best: f64, iterations: usize },
    #[error("iterate collapsed to zero")]
    Collapse,
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
    #[error("singular system")]
    SingularSystem,
    #[error("outside hypotheses: {0}")]
    OutOfHypothesis(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
