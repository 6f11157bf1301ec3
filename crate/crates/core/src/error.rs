use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: malformed header column {column} ({name:?}): {reason}")]
    TraceHeader {
        path: String,
        column: usize,
        name: String,
        reason: String,
    },
    #[error("{path}: line {line}: {reason}")]
    TraceRow {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("negative power {value} W at row {row}, column {column:?}")]
    NegativePower {
        row: usize,
        column: String,
        value: f64,
    },
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("time index {index} out of range for trace of {len} steps")]
    Index { index: usize, len: usize },
    #[error("invalid floorplan: {0}")]
    InvalidFloorplan(String),
    #[error("power mapped to unplaced components: {}", .0.join(", "))]
    UnplacedComponents(Vec<String>),
    #[error("duplicate power entries for components: {}", .0.join(", "))]
    DuplicatePower(Vec<String>),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("geometry mismatch: {0}")]
    Geometry(String),
    #[error("unservable tiles (demand but no grid intersections): {tiles:?}")]
    UnservableTiles { tiles: Vec<usize> },
    #[error("{count} nodes cannot reach a pad (first: {first})")]
    Disconnected { count: usize, first: String },
    #[error("network has no pads")]
    NoPads,
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("solver did not converge in {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("cannot compare reports: {0}")]
    Comparison(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}

/// Attaches a pipeline stage name to an error.
pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
