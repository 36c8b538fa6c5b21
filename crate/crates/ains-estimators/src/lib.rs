//! Error-state EKF SLAM and MSCKF VIO over point, line and plane features,
//! linearized either at the current estimate or at the ground truth.

mod ekf;
mod model;
mod msckf;
mod state;

pub use ekf::{ekf_propagate, ekf_update, kalman_update};
pub use model::{measure, predict, Observation, SensorNoise};
pub use msckf::{
    left_annihilator, msckf_augment, msckf_update_track, msckf_update_tracks, projected_update, triangulate_point, Track, TrackObs,
    DEFAULT_WINDOW, MIN_TRACK,
};
pub use state::{HybridState, LinearizationMode, PoseClone, StateFeature, Truth};

use ains_measurement::MeasError;
use ains_propagation::PropagationError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstError {
    #[error("covariance is not positive semi-definite (min eigenvalue {0:e})")]
    CovarianceNotPSD(f64),
    #[error("innovation covariance is singular")]
    SingularInnovation,
    #[error("feature Jacobian is rank deficient")]
    RankDeficientHf,
    #[error("track has {0} observations, need at least {MIN_TRACK}")]
    TrackTooShort(usize),
    #[error("no feature or clone with index {0}")]
    UnknownIndex(usize),
    #[error("observation does not match the feature type")]
    ObservationMismatch,
    #[error("ground truth has no state at t = {0}")]
    TruthMissing(f64),
    #[error(transparent)]
    Measurement(#[from] MeasError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
}
