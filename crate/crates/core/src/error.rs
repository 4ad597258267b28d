use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("eigenvalue iteration did not converge: {0}")]
    EigenFailure(String),

    #[error("left/right eigenvectors are nearly orthogonal (|y*x| = {inner:.3e})")]
    IllConditionedEigenpair { inner: f64 },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid perturbation structure: {0}")]
    InvalidStructure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("objective vanishes on every unsaturated edge")]
    DegenerateObjective,

    #[error("saturated edges exceed the energy budget (radicand {radicand:.3e})")]
    InfeasibleEnergy { radicand: f64 },

    #[error("the optimizer is fully saturated, non-saturation assumption is violated")]
    FullySaturated,

    #[error("enumeration over {edges} edges exceeds the limit of {limit}")]
    TooLarge { edges: usize, limit: usize },

    #[error("no convergence after {iterations} iterations")]
    MaxIterations { iterations: usize },

    #[error("second smallest singular value of the shifted matrix is {sigma:.3e}")]
    SingularShift { sigma: f64 },

    #[error("spectrum cloud is empty")]
    EmptyCloud,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unsupported Matrix Market field `{0}`")]
    UnsupportedField(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Solver-side failures as opposed to input/parse problems.
    pub fn is_solver_error(&self) -> bool {
        !matches!(
            self,
            Error::Parse { .. } | Error::UnsupportedField(_) | Error::Io { .. }
                | Error::InvalidStructure(_)
                | Error::InvalidArgument(_)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::EigenFailure(_) => "EigenFailure",
            Error::IllConditionedEigenpair { .. } => "IllConditionedEigenpair",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::InvalidStructure(_) => "InvalidStructure",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::DegenerateObjective => "DegenerateObjective",
            Error::InfeasibleEnergy { .. } => "InfeasibleEnergy",
            Error::FullySaturated => "FullySaturated",
            Error::TooLarge { .. } => "TooLarge",
            Error::MaxIterations { .. } => "MaxIterations",
            Error::SingularShift { .. } => "SingularShift",
            Error::EmptyCloud => "EmptyCloud",
            Error::Parse { .. } => "ParseError",
            Error::UnsupportedField(_) => "UnsupportedField",
            Error::Io { .. } => "IoError",
        }
    }
}
