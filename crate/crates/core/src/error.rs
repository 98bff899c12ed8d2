use thiserror::Error;

use crate::algebra::AlgTag;

pub type Result<T> = std::result::Result<T, GStrandError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GStrandError {
    #[error("algebra tag mismatch: expected {expected}, found {found}")]
    TagMismatch { expected: AlgTag, found: AlgTag },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("spectral derivative requires an even number of points, got n = {n}")]
    SpectralOddGrid { n: usize },

    #[error("wavenumber {k} is not resolvable on a grid of {n} points (|k| <= {max})")]
    UnresolvableWavenumber { k: i64, n: usize, max: i64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("state and diagnostics belong to different groups: {0}")]
    GroupMismatch(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-finite values after step {step}")]
    NonFinite { step: usize },

    #[error("time step {dt} exceeds twice the grid spacing {ds}")]
    CflViolation { dt: f64, ds: f64 },

    #[error("invalid SE(3) frame: {0}")]
    InvalidFrame(String),

    #[error("expected {expected} snapshots, got {got}")]
    WrongSnapshotCount { expected: usize, got: usize },

    #[error("unsupported combination: {0}")]
    Unsupported(String),
}
