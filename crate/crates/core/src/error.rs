use std::path::PathBuf;

/// Errors raised across the planner.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("control schedule is empty")]
    EmptySchedule,

    #[error("trajectory grids do not match: {0}")]
    GridMismatch(String),

    #[error("bracket infeasible: minimized risk {risk:.4} at T_hi={t_hi} s exceeds threshold {threshold}")]
    InfeasibleBracket { t_hi: f64, risk: f64, threshold: f64 },

    #[error("non-finite objective at iteration {iteration}: {detail}")]
    NonFinite { iteration: usize, detail: String },

    #[error("line {line}: key `{key}`: {reason}")]
    Parse { line: usize, key: String, reason: String },

    #[error("missing required key `{0}`")]
    MissingKey(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("plan file: {0}")]
    PlanFormat(String),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
