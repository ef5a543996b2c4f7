use thiserror::Error;

/// Errors raised by the scheduling library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A rate model descriptor is malformed.
    #[error("invalid rate model: {0}")]
    InvalidModel(String),

    /// The requested cumulative intensity exceeds the total mass of the model.
    #[error("cumulative intensity {requested} is unreachable (total mass {total})")]
    Unreachable { requested: f64, total: f64 },

    /// A piece of model metadata needed by the operation is not available.
    #[error("{0} is unavailable for this rate model")]
    Unavailable(&'static str),

    /// A task restarted more often than the configured cap.
    #[error(
        "replication {replication}: task {task} (length {length}) exceeded {cap} restarts; \
         expected restarts grow like e^(rate*length) ~ {expected_blowup:.3e}"
    )]
    Divergence {
        replication: u64,
        task: usize,
        length: f64,
        cap: u64,
        expected_blowup: f64,
    },

    /// The integral-equation grid is too coarse for the rate level.
    #[error("grid step {h} too coarse: {reason}")]
    StepTooCoarse { h: f64, reason: String },

    /// The model has no constant tail and no clamp point was supplied.
    #[error("rate model has no constant tail; supply a clamp point for the tail closure")]
    MissingClosure,

    /// Step refinement ran below the minimum step before converging.
    #[error(
        "no convergence: last step {h}, last change {last_change:.3e} > tolerance {tol:.3e}"
    )]
    NonConvergence { h: f64, last_change: f64, tol: f64 },

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge on [{a}, {b}] (error estimate {estimate:.3e})")]
    Quadrature { a: f64, b: f64, estimate: f64 },

    /// Too many permutations for an exhaustive scan.
    #[error("{count} feasible permutations exceed the exhaustive-scan guard {limit}; use SPT/LPT heuristics")]
    TooManyPermutations { count: u128, limit: u128 },

    /// A permutation or precedence specification is malformed.
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    /// Experiment configuration problem.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    /// An error raised while evaluating one family/permutation of a run.
    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
