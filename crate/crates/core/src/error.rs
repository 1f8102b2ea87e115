use thiserror::Error;

/// Errors produced anywhere in the simulation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("ray is parallel to the plane")]
    NoIntersection,

    #[error("plane lies behind the ray origin (t = {0})")]
    BehindOrigin(f64),

    #[error("point is not reachable by the beam (z' = {0})")]
    Unreachable(f64),

    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    #[error("azimuth grid needs {requested} states, cap is {cap}")]
    Resource { requested: usize, cap: usize },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("no feasible candidate in the search space")]
    NoFeasibleCandidate,

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI's single-line error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::NoIntersection => "no_intersection",
            Error::BehindOrigin(_) => "behind_origin",
            Error::Unreachable(_) => "unreachable",
            Error::SingularGeometry(_) => "singular_geometry",
            Error::Resource { .. } => "resource",
            Error::Schedule(_) => "schedule",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::Calibration(_) => "calibration",
            Error::NoFeasibleCandidate => "no_feasible_candidate",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
