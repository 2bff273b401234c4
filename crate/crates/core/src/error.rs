use thiserror::Error;

/// Errors raised by the geometry, quadrature and verification layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Radial function evaluated to a non-positive (or non-finite) value.
    #[error("star body violation: radial value {value} in direction {direction:?}")]
    StarBody { direction: Vec<f64>, value: f64 },

    /// Integrand produced a non-finite value at a quadrature node or sample.
    #[error("non-finite integrand value {value} at node {node:?}")]
    Evaluation { node: Vec<f64>, value: f64 },

    #[error("degenerate body: {0}")]
    Degenerate(String),

    /// An inequality check came out below its tolerance.
    #[error(
        "falsification: {check} has rel_slack {rel_slack} < -{tol} at evaluation {evaluation} \
         (params {params:?}, seed {seed})"
    )]
    Falsified {
        check: String,
        params: Vec<f64>,
        rel_slack: f64,
        tol: f64,
        seed: u64,
        evaluation: usize,
    },

    /// A parameterized body family rejected a parameter vector.
    #[error("family generation failed at parameters {params:?}: {reason}")]
    Generation { params: Vec<f64>, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
