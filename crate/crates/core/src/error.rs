use std::path::PathBuf;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("volume fraction {target} is unreachable (Matérn II saturation limit {limit})")]
    UnreachableFraction { target: f64, limit: f64 },

    #[error("mesh alignment: {0}")]
    Alignment(String),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("linear solve did not reach tolerance (relative residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("point ({x}, {y}) lies outside the mesh")]
    OutOfDomain { x: f64, y: f64 },

    #[error("argument outside the function domain: {0}")]
    Domain(String),

    #[error("Green function evaluated at coincident points")]
    SingularPoint,

    #[error("evaluation point at distance {distance} from the boundary, minimum is {min}")]
    TooCloseToBoundary { distance: f64, min: f64 },

    #[error("region selection contains no triangles")]
    RegionEmpty,

    #[error("rate fit needs at least {needed} distinct epsilon values, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config: {0}")]
    Config(String),

    #[error("corrector cache {path}: {reason}")]
    Cache { path: PathBuf, reason: String },

    #[error("report has no rows")]
    EmptyReport,

    #[error("realization {index}: {source}")]
    Realization {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
