use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid mesh: {0}")]
    Validation(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("degenerate neighborhood around point {0}: all neighbors coincide")]
    DegenerateNeighborhood(usize),

    #[error("curvature term with nonzero coefficient vanishes identically ({0})")]
    AllZeroCurvature(&'static str),

    #[error("invalid bandwidth {0}: must be finite and positive")]
    InvalidBandwidth(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("selected submatrix is numerically singular ({0} landmarks)")]
    SingularSubmatrix(usize),

    #[error("numerical breakdown at index {index}: pivot {pivot:e} is not positive")]
    NumericalBreakdown { index: usize, pivot: f64 },

    #[error("design is empty")]
    EmptyDesign,

    #[error("nonpositive sigma at n = {0}")]
    NonpositiveSigma(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code, used by the CLI on failure.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "E_PARSE",
            Error::Validation(_) => "E_VALIDATION",
            Error::DegenerateGeometry(_) => "E_DEGENERATE_GEOMETRY",
            Error::DegenerateNeighborhood(_) => "E_DEGENERATE_NEIGHBORHOOD",
            Error::AllZeroCurvature(_) => "E_ALL_ZERO_CURVATURE",
            Error::InvalidBandwidth(_) => "E_INVALID_BANDWIDTH",
            Error::DimensionMismatch { .. } => "E_DIMENSION_MISMATCH",
            Error::SingularSubmatrix(_) => "E_SINGULAR_SUBMATRIX",
            Error::NumericalBreakdown { .. } => "E_NUMERICAL_BREAKDOWN",
            Error::EmptyDesign => "E_EMPTY_DESIGN",
            Error::NonpositiveSigma(_) => "E_NONPOSITIVE_SIGMA",
            Error::Config(_) => "E_CONFIG",
            Error::Io { .. } => "E_IO",
            Error::Json(_) => "E_JSON",
        }
    }

    pub(crate) fn parse(path: &std::path::Path, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
