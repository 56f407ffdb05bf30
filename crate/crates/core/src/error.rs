use thiserror::Error;

/// Errors raised by game construction, geometry, estimation and the solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Shapes or indices do not line up (wrong dimension, bad player index).
    #[error("structural error: {0}")]
    Structural(String),
    /// A point lies outside the set or outside the domain of a mirror map.
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested operation needs data the game does not provide.
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    /// Non-finite input or output.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A documented precondition on an argument has been violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Schedule or option validation failed; every violation is listed.
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),
    /// The step-size condition `(tau * L / mu)^2 <= 1/12` does not hold.
    #[error("step-size guard failed: (tau*L/mu)^2 = {value:.6} exceeds 1/12 (tau = {tau}, L = {lipschitz}, mu = {modulus})")]
    StepGuard {
        value: f64,
        tau: f64,
        lipschitz: f64,
        modulus: f64,
    },
    /// Failure inside an iteration of the solver.
    #[error("iteration {k}: {source}")]
    Iteration {
        k: usize,
        #[source]
        source: Box<Error>,
    },
    /// A broken internal invariant. Seeing this is a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_iteration(self, k: usize) -> Error {
        Error::Iteration {
            k,
            source: Box::new(self),
        }
    }
}
