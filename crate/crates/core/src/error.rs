use thiserror::Error;

/// Errors produced by the analysis routines.
///
/// Each variant maps onto one CLI exit status: shape/validation problems,
/// capacity overruns, and violated mathematical hypotheses.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("empty relation: {0}")]
    EmptyRelation(String),

    #[error("capacity exceeded: {what} needs {needed} points, cap is {cap}")]
    Capacity { what: String, needed: u128, cap: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no witness chain from {from} to {to}: pair is unreachable")]
    NoWitness { from: usize, to: usize },

    #[error("not chain transitive at epsilon {epsilon}: {scc_count} strongly connected components, no common core")]
    NotChainTransitive {
        epsilon: f64,
        scc_count: usize,
        components: Vec<Vec<usize>>,
    },

    #[error("no cyclic factor: the epsilon-chain graph is aperiodic")]
    NoFactor,

    #[error("inconsistent quotient: {0}")]
    InconsistentQuotient(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("relation is not a total function: {0}")]
    NotFunctional(String),

    #[error("zero distance between distinct points {0} and {1}")]
    ZeroDenominator(usize, usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag, stable across releases.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::EmptyRelation(_) => "empty_relation",
            Error::Capacity { .. } => "capacity",
            Error::Parse(_) => "parse",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NoWitness { .. } => "no_witness",
            Error::NotChainTransitive { .. } => "not_chain_transitive",
            Error::NoFactor => "no_factor",
            Error::InconsistentQuotient(_) => "inconsistent_quotient",
            Error::Hypothesis(_) => "hypothesis",
            Error::NotFunctional(_) => "not_functional",
            Error::ZeroDenominator(..) => "zero_denominator",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
