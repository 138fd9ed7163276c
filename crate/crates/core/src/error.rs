use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
///
/// Variants map onto CLI exit codes: usage-level problems (flavor, domain,
/// degenerate input, unsupported model) exit 2, numerical and simulation
/// failures exit 3, and an estimate outside the attainable range exits 4.
#[derive(Debug, Error)]
pub enum Error {
    /// A variance-function operation was called on a model that only carries
    /// a stationary covariance (or vice versa).
    #[error("operation not available for this noise flavor: {0}")]
    Flavor(String),

    /// A quadrature or root-finding routine failed to converge.
    #[error("numerical evaluation failed: {0}")]
    Numerics(String),

    /// Path synthesis failed (embedding not nonnegative and Cholesky did not
    /// succeed after the jitter ladder).
    #[error("simulation failed: {0}")]
    Simulation(String),

    /// An argument was outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested mean square is outside the range of the stationary
    /// variance map, so no estimate exists.
    #[error(
        "mean square {value:.6e} outside attainable range (psi spans [{psi_hi:.6e}, {psi_lo:.6e}] \
         on the bracket)"
    )]
    EstimateOutOfRange {
        value: f64,
        /// psi at the largest bracketed theta (lower end of the range).
        psi_hi: f64,
        /// psi at the smallest bracketed theta (upper end of the range).
        psi_lo: f64,
    },

    /// The input carries no usable signal (all-zero path, empty sample).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// The estimator does not support this noise model.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// The squared autocovariance has a non-integrable tail, so the classical
    /// asymptotic variance does not exist.
    #[error("non-integrable autocovariance tail: {0}")]
    NonIntegrable(String),

    /// Too many replications of a Monte Carlo experiment failed.
    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input file (CSV observations, TOML config).
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Exit code used by the command-line interface.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Flavor(_)
            | Error::Domain(_)
            | Error::DegenerateInput(_)
            | Error::UnsupportedModel(_)
            | Error::Io(_)
            | Error::Parse(_) => 2,
            Error::Numerics(_)
            | Error::Simulation(_)
            | Error::NonIntegrable(_)
            | Error::Experiment(_) => 3,
            Error::EstimateOutOfRange { .. } => 4,
        }
    }
}
