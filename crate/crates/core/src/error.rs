use thiserror::Error;

/// Numerical failures of the soliton engine and the verification oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("kernel matrix is numerically singular (condition estimate {cond:e})")]
    SingularKernel { cond: f64 },

    #[error("spectral parameter is within {tol:e} of the pole at index {index}")]
    PoleHit { index: usize, tol: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("field has not decayed at the domain edge: |q| = {magnitude:e} exceeds {threshold:e}; try half-width L >= {suggested_half_width}")]
    TailNotDecayed {
        magnitude: f64,
        threshold: f64,
        suggested_half_width: f64,
    },

    #[error("integration state became non-finite near x = {x}")]
    NonFiniteState { x: f64 },

    #[error("field evaluation failed at (x, t) = ({x}, {t}): {source}")]
    EvaluationFailure {
        x: f64,
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, x: f64, t: f64) -> Error {
        match self {
            e @ Error::EvaluationFailure { .. } => e,
            e => Error::EvaluationFailure {
                x,
                t,
                source: Box::new(e),
            },
        }
    }

    /// Innermost cause, looking through [`Error::EvaluationFailure`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::EvaluationFailure { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
