use thiserror::Error;

/// Errors raised anywhere in the spectral pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no block intersects the requested J window [{0}, {1}]")]
    EmptyWindow(f64, f64),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("commutator check failed: ||[J,H]|| = {norm:e} on interior states")]
    CommutatorViolation { norm: f64 },
    #[error("chart is not injective: {0}")]
    InjectivityFailure(String),
    #[error("too few points: {0}")]
    TooSparse(String),
    #[error("ambiguous neighbour while transporting label ({0}, {1})")]
    AmbiguousNeighbor(i64, i64),
    #[error("{0} point(s) in the region could not be reached by transport")]
    Disconnected(usize),
    #[error("empty strip around x = {0}")]
    EmptyStrip(f64),
    #[error("labellings are inconsistent: {0}")]
    Inconsistent(String),
    #[error("cocycle condition violated on charts {0:?}")]
    CocycleViolation(Vec<usize>),
    #[error("chart union is not simply connected")]
    NonSimplyConnected,
    #[error("missing neighbour label ({0}, {1})")]
    MissingNeighbor(i64, i64),
    #[error("expected a positive derivative, got {0}")]
    SignError(f64),
    #[error("action jump of {0} between successive probes")]
    ActionDiscontinuity(i64),
    #[error("counting window too narrow: only {0} point(s)")]
    WindowTooNarrow(usize),
    #[error("no logarithmic peak found near x = {0}")]
    NoPeak(f64),
    #[error("ill-conditioned fit (condition number {0:e})")]
    IllConditioned(f64),
    #[error("duplicate mu value {0}")]
    DuplicateMu(f64),
    #[error("edge fit failed: {0}")]
    EdgeFitFailure(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse failure classes, used by the command-line driver for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Configuration,
    Numerical,
    Labelling,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            DimensionMismatch(_) | EmptyWindow(..) | InvalidInput(_) | DuplicateMu(_) => {
                ErrorClass::Configuration
            }
            NumericalFailure(_) | CommutatorViolation { .. } | InjectivityFailure(_)
            | SignError(_) | WindowTooNarrow(_) | NoPeak(_) | IllConditioned(_)
            | EdgeFitFailure(_) => ErrorClass::Numerical,
            TooSparse(_) | AmbiguousNeighbor(..) | Disconnected(_) | EmptyStrip(_)
            | Inconsistent(_) | CocycleViolation(_) | NonSimplyConnected | MissingNeighbor(..)
            | ActionDiscontinuity(_) => ErrorClass::Labelling,
            Io(_) | Json(_) | Csv(_) => ErrorClass::Io,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
