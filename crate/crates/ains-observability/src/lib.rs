//! Linearized observability matrices, numeric null spaces and the analytic
//! unobservable directions of aided INS with points, lines and planes.

pub mod analytic;
pub mod matrix;
pub mod nullspace;

pub use analytic::{analytic_nullspace, NullBasis, NullCase};
pub use matrix::{build_observability_matrix, LineModel, ObsFeature, ObservabilityMatrix, RowSource, RowTag};
pub use nullspace::{numeric_nullspace, rank_over_time, span_residual, verify_nullspace, DEFAULT_REL_TOL};

use ains_measurement::MeasError;
use ains_propagation::PropagationError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ObsError {
    #[error(transparent)]
    Measurement(#[from] MeasError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error("case does not match the features: {0}")]
    CaseMismatch(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("need at least two epochs, got {0}")]
    TooFewEpochs(usize),
}
