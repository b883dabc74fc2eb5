use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("position ({x:.6}, {y:.6}) lies outside the grid domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("pressure solve did not converge after {iterations} iterations (residual {residual:.3e}, target {target:.3e})")]
    SolverDiverged {
        iterations: usize,
        residual: f64,
        target: f64,
    },

    #[error("{count} solid particle(s) with non-positive deformation determinant")]
    InvertedElement { count: usize },

    #[error("explicit solid substep unstable at dt = {dt:.3e}; try dt <= {suggested_dt:.3e}")]
    UnstableSubstep { dt: f64, suggested_dt: f64 },

    #[error("no significant shedding peak in probe signal")]
    NoShedding,

    #[error("probe record too short: {periods:.1} periods available, {required} required")]
    InsufficientRecord { periods: f64, required: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    #[error("invalid configuration at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("mesh parse error on line {line}: {message}")]
    MeshParse { line: usize, message: String },

    #[error("malformed grid dump: {0}")]
    DumpFormat(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        SimError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that stem from the numerics rather than user input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SimError::SolverDiverged { .. }
                | SimError::InvertedElement { .. }
                | SimError::UnstableSubstep { .. }
                | SimError::NonFinite { .. }
                | SimError::OutOfDomain { .. }
        )
    }
}
