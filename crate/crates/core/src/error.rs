use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty frame")]
    EmptyFrame,

    #[error("k too large: requested {k}, only {available} points available")]
    KTooLarge { k: usize, available: usize },

    #[error("need two points")]
    NeedTwoPoints,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("metric is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("infeasible: lower bound {lower_bound} exceeds {count} weights")]
    Infeasible { lower_bound: f64, count: usize },

    #[error("conjugate gradient did not converge: relative residual {residual:e} after {iterations} iterations")]
    CgNotConverged { residual: f64, iterations: usize },

    #[error("step size too large: objective increased for 3 consecutive iterations (trace {trace:?})")]
    StepSizeTooLarge { trace: Vec<f64> },

    #[error("outer iteration {iteration}: {source}")]
    Outer {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("frame {frame}: {source}")]
    Frame {
        frame: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical solvers (as opposed to bad input).
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::CgNotConverged { .. } | Error::StepSizeTooLarge { .. } => true,
            Error::Outer { source, .. } | Error::Frame { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
