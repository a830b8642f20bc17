use thiserror::Error;

/// Errors raised by the solver, the bound calculators and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed arguments: wrong lengths, inconsistent histories, bad sizes.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A coefficient function returned NaN or infinity.
    #[error("coefficient evaluation produced a non-finite value at node {node}")]
    Evaluation { node: usize },

    /// The per-step linear system was singular to working precision.
    #[error("linear solve failed at step {step}: pivot {pivot:e} below {threshold:e}")]
    Solver {
        step: usize,
        pivot: f64,
        threshold: f64,
    },

    /// The parareal iterate blew up or became non-finite.
    #[error("parareal iteration diverged at k = {k}, coarse node n = {n}")]
    Divergence { k: usize, n: usize },

    /// Parameters for which a bound formula is undefined (e.g. a pole).
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Arithmetic overflow or table bounds exceeded.
    #[error("range error: {0}")]
    Range(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
