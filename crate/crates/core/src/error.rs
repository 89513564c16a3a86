use thiserror::Error;

use crate::diagnostics::ContainmentReport;
use crate::eigensolver::EigenSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("site ({ix}, {iy}) outside a {nx}x{ny} grid")]
    SiteOutOfRange { ix: usize, iy: usize, nx: usize, ny: usize },

    #[error("sites {0} and {1} are not nearest neighbours")]
    NotNeighbors(usize, usize),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("closed-form spectrum needs bigomega <= omega (got {bigomega} > {omega})")]
    Supercritical { omega: f64, bigomega: f64 },

    #[error("effective mass diverges at a band inflection point (cos(kd) = {0:e})")]
    BandInflection(f64),

    #[error("dimension {dim} exceeds the dense solver cap {cap}")]
    DenseTooLarge { dim: usize, cap: usize },

    #[error(
        "eigensolver did not converge after {restarts} restarts (worst residual {worst:e}, target {target:e})"
    )]
    NotConverged {
        restarts: usize,
        worst: f64,
        target: f64,
        partial: Box<EigenSolution>,
    },

    #[error("need {needed} resolved states, solution holds {available}")]
    InsufficientStates { needed: usize, available: usize },

    #[error("empty multiplet")]
    EmptyMultiplet,

    #[error("{0}")]
    Observable(String),

    #[error("{0}")]
    Diagnostics(String),

    #[error("refinement scan finished with unconverged levels")]
    PartialReport(Box<ContainmentReport>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field, reason: reason.into() }
    }
}
