use thiserror::Error;

use crate::complex::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative method failed to reach its tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("face {face}: {source}")]
    Face {
        face: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid cell complex: {}", join_violations(.0))]
    InvalidComplex(Vec<Violation>),

    #[error("unknown vertex id `{0}`")]
    UnknownVertex(String),

    #[error("Jacobian asymmetry {0:e} exceeds guard")]
    Asymmetric(f64),

    /// Cholesky factorization of the Jacobian failed; carries the offending log-curvatures.
    #[error("Jacobian is not positive definite at s = {state:?}")]
    NotPositiveDefinite { state: Vec<f64> },

    #[error("{vertices} vertices exceed the exhaustive subset cap of {cap}; use sampled mode")]
    SubsetCap { vertices: usize, cap: usize },

    /// Malformed input document; `path` locates the offending value.
    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("targets are not admissible (slack {slack:e} on subset {subset:?})")]
    Inadmissible { slack: f64, subset: Vec<String> },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn in_face(self, face: usize) -> Self {
        Error::Face {
            face,
            source: Box::new(self),
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
