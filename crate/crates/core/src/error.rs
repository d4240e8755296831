use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("point ({0}, {1}) is not on the domain boundary")]
    NotOnBoundary(f64, f64),

    #[error("mesh generation failed: {0}")]
    MeshFailure(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("mesh invariant violated: {0}")]
    InvariantViolation(String),

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("conflicting Dirichlet values at node {node}: {first:?} vs {second:?}")]
    ConstraintConflict { node: usize, first: [f64; 2], second: [f64; 2] },

    #[error("inflow data does not match at the inflow corners: g(A-) = {lower:?}, g(A+) = {upper:?}")]
    IncompatibleCorners { lower: [f64; 2], upper: [f64; 2] },

    #[error("Neumann right-hand side is not compatible: relative mean {0:e}")]
    CompatibilityFailure(f64),

    #[error("linear solve failed: {0}")]
    SolveFailure(String),

    #[error("singular saddle-point system: {0}")]
    SingularSystem(String),

    #[error("iterative solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown manufactured case `{0}`")]
    UnknownCase(String),

    #[error("unsupported boundary segment for this norm: {0}")]
    UnsupportedSegment(String),

    #[error("periodic samples do not match at the period ends: {0} vs {1}")]
    PeriodMismatch(f64, f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
