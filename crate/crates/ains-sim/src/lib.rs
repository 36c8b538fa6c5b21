//! Trajectories, scenes and synthetic sensor data for aided-INS experiments.

pub mod measurements;
pub mod monte_carlo;
pub mod scene;
pub mod trajectory;

pub use measurements::{scene_features, simulate_measurements, Frame, MeasurementSpec, PlaneForm, SimData};
pub use monte_carlo::{nees_interval, run_monte_carlo, run_seed, FilterKind, McConfig, McReport, ModeReport, PriorSigmas};
pub use scene::{sample_scene, visible_from_all, FeatureSceneSpec, Scene, Segment};
pub use trajectory::{generate_trajectory, mount, Kinematics, Motion, Sinusoid, Trajectory, TrajectorySpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("could not place {0} after bounded retries")]
    PlacementFailure(String),
    #[error("filter failed: {0}")]
    Filter(String),
}
