use std::path::PathBuf;

use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Error)]
pub enum RomError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("boundary tag `{0}` is not present on the mesh")]
    MissingTag(String),

    #[error("boundary tag `{0}` selects no degrees of freedom")]
    EmptyTrace(String),

    #[error("coefficient outside its admissible domain: {0}")]
    CoefficientDomain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("inconsistent Dirichlet constraint on dof {dof}: {first} vs {second}")]
    InconsistentConstraint { dof: usize, first: f64, second: f64 },

    #[error("linear solver failed: {reason} (relative residual {residual:e})")]
    SolverFailure { reason: String, residual: f64 },

    #[error("time step {step} failed: {source}")]
    StepFailure {
        step: usize,
        #[source]
        source: Box<RomError>,
    },

    #[error("empty sample request: {0}")]
    EmptySample(String),

    #[error("snapshot matrix is degenerate: {0}")]
    DegenerateSnapshots(String),

    #[error("DEIM basis is degenerate at column {step}")]
    DegenerateBasis { step: usize },

    #[error("slave interface point {point} lies {distance:e} from the master surface (limit {limit:e})")]
    ProjectionDistance { point: usize, distance: f64, limit: f64 },

    #[error("requested {requested} interpolation points but only {available} basis vectors")]
    Oversampling { requested: usize, available: usize },

    #[error("insufficient snapshots: {0}")]
    InsufficientSnapshots(String),

    #[error("reduced system is singular: {0}")]
    SingularRom(String),

    #[error("estimator did not converge: {0}")]
    EstimatorConvergence(String),

    #[error("expression error in `{source_text}`: {message}")]
    Expression { source_text: String, message: String },

    #[error("configuration error{}: {message}", path.as_ref().map(|p| format!(" in {}", p.display())).unwrap_or_default())]
    Config { path: Option<PathBuf>, message: String },

    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RomError {
    pub fn config(message: impl Into<String>) -> Self {
        RomError::Config { path: None, message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RomError::Io { path: path.into(), source }
    }

    /// True for errors caused by user input rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            RomError::Config { .. }
                | RomError::Expression { .. }
                | RomError::MissingTag(_)
                | RomError::InvalidGeometry(_)
                | RomError::EmptySample(_)
                | RomError::Format { .. }
                | RomError::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, RomError>;
