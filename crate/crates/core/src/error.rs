use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::Rect;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate rectangle {0} has no aspect ratio")]
    Degenerate(Rect),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("rectangle has min > max")]
    Inverted,
    #[error("aspect ratio must be >= 1, got {0}")]
    InvalidAspectRatio(f64),
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid instance: {0}")]
    Validation(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CandidateError {
    #[error("candidate set exceeds the cap of {cap} rectangles")]
    TooManyCandidates { cap: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("exact solver memory limit: {0}")]
    MemoryLimit(String),
    #[error("assignment violates the intersection clause of candidates {0} and {1}")]
    InfeasibleAssignment(usize, usize),
    #[error("assignment has {got} values, expected {expected}")]
    AssignmentLength { expected: usize, got: usize },
    #[error("cannot parse model: {0}")]
    ModelParse(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("invalid DBCR input: {0}")]
    InvalidInput(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("layer {layer} has a shape the segment-cover routine does not handle")]
    UnsupportedLayer { layer: u32 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Crate-wide error with a stable machine-readable category.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Candidate(#[from] CandidateError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn category(&self) -> &'static str {
        match self {
            Error::Geometry(_) => "geometry",
            Error::Instance(InstanceError::Io { .. }) | Error::Io(_) => "io",
            Error::Instance(InstanceError::Parse { .. }) => "parse",
            Error::Instance(InstanceError::Validation(_)) => "validation",
            Error::Candidate(_) => "resource-limit",
            Error::Solve(SolveError::MemoryLimit(_)) => "resource-limit",
            Error::Solve(_) => "solver",
            Error::Reduction(ReductionError::ResourceLimit(_)) => "resource-limit",
            Error::Reduction(ReductionError::Parse { .. }) => "parse",
            Error::Reduction(_) => "validation",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
