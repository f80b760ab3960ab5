use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration index {index} out of range for {n_spins} spins")]
    ConfigOutOfRange { index: usize, n_spins: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    MismatchedDimensions { expected: usize, found: usize },

    #[error("combined kernel has entry {value:e} below the probability floor")]
    NegativeProbability { value: f64 },

    #[error("kernel is not symmetric (max asymmetry {asymmetry:e})")]
    AsymmetricKernel { asymmetry: f64 },

    #[error("transition matrix row {row} has negative diagonal {value:e}")]
    NegativeDiagonal { row: usize, value: f64 },

    #[error("chain is not reversible (detailed-balance violation {violation:e})")]
    NotReversible { violation: f64 },

    #[error("eigensolver failed: {0}")]
    EigensolverFailure(String),

    #[error("{what} needs {n_spins} spins, budget allows at most {limit}")]
    BudgetExceeded {
        what: &'static str,
        n_spins: usize,
        limit: usize,
    },

    #[error("propagator did not converge: {0}")]
    NonConvergence(String),

    #[error("two-level frequency is degenerate (gamma^2 = {gamma_sq:e})")]
    DegenerateFrequency { gamma_sq: f64 },

    #[error("set measure {measure} exceeds 1/2")]
    MeasureTooLarge { measure: f64 },

    #[error("empty configuration set")]
    EmptySet,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("distance did not fall below threshold within {cap} steps")]
    NoConvergence { cap: u64 },

    #[error("nonpositive gap {0:e} cannot enter a log-scale fit")]
    NonPositiveGap(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
