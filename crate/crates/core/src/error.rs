use thiserror::Error;

use crate::instance::Violation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("score evaluates to -inf: {0}")]
    NonFiniteScore(String),

    #[error("tangent point {index} lies on the simplex boundary; log score gradient diverges")]
    BoundaryTangent { index: usize },

    #[error("signal {signal:?} has zero probability")]
    ZeroProbabilitySignal { signal: String },

    #[error("signal {signal:?} never co-occurs with bob outcome {bob}")]
    ZeroProbabilityPair { signal: String, bob: usize },

    #[error("size cap exceeded: {what} needs {required}, cap is {cap}")]
    SizeCapExceeded {
        what: &'static str,
        required: u128,
        cap: u128,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("posteriors are not Bayes plausible (max residual {max_residual:e})")]
    BayesPlausibilityViolated {
        residual: Vec<f64>,
        max_residual: f64,
    },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("instance failed validation: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("io error: {0}")]
    Io(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
