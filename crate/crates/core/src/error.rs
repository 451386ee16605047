use thiserror::Error;

/// Errors raised by graph construction, operator assembly and the estimators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(usize),

    #[error("subgraph has an empty boundary (it covers the whole ambient graph)")]
    EmptyBoundary,

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("eigendecomposition failed: {reason}\n{dump}")]
    NumericalFailure { reason: String, dump: String },

    #[error("energy {energy} lies within {tolerance:e} of the spectrum (gap {gap:e})")]
    NearSpectrum { energy: f64, gap: f64, tolerance: f64 },

    #[error("degenerate scale sequence: {0}")]
    DegenerateScale(String),

    #[error("lemma hypothesis violated: {0}")]
    HypothesisFailure(String),

    #[error("schedule infeasible: {0}")]
    ScheduleInfeasible(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
