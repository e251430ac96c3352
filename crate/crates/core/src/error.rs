use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("linear program infeasible or unbounded: {0}")]
    Infeasible(String),

    #[error("mesh with target_h = {target_h} needs about {required} nodes, above the cap of {cap}")]
    MeshTooLarge {
        target_h: f64,
        required: usize,
        cap: usize,
    },

    #[error("eigensolver did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("no cell reached {min_count} counts; increase n_paths (currently {n_paths})")]
    InsufficientCounts { min_count: usize, n_paths: usize },

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
