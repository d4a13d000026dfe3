//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CisimError {
    /// The mixing angle and its gradient are undefined at the conical
    /// intersection itself.
    #[error("mixing angle undefined at the conical intersection ({x}, {y})")]
    CiPoint { x: f64, y: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A GP Hamiltonian was requested on a grid with a node at the CI.
    #[error("grid node coincides with the conical intersection at ({x}, {y})")]
    CiOnGrid { x: f64, y: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    /// Subspace localization only handles groups of one or two states.
    #[error("degenerate group has {0} members; subspace localization handles at most 2")]
    GroupTooLarge(usize),

    #[error("eigensolver did not converge: best residuals {residuals:?} after {iterations} iterations")]
    NotConverged {
        residuals: Vec<f64>,
        iterations: usize,
    },

    #[error("delocalization curve has no interior derivative maximum")]
    NoInflection,

    #[error("spectral range estimate failed: {0}")]
    SpectralRangeFail(String),

    #[error("propagation tolerance {tol:e} unreachable (step {dt:e}, order {order})")]
    TolUnreachable { tol: f64, dt: f64, order: usize },
}
