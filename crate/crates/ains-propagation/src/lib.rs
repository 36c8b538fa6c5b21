//! IMU mean propagation, discrete error-state transition and noise covariance.
//!
//! Error state order is `(dθ, b_g, v, b_a, p)`, followed by feature errors.
//! Gravity is `[0, 0, -9.81]` and the accelerometer measures specific force,
//! so `v_dot = R^T (a_m - b_a) + g`.

pub mod check;
mod state;
mod transition;

pub use state::{propagate_mean, propagate_trajectory, ImuSample, ImuState, NoiseParams, TrajPoint};
pub use transition::{compute_phi, compute_qk, StateTransition};

use nalgebra::Vector3;

pub const GRAVITY: f64 = 9.81;

pub fn gravity() -> Vector3<f64> {
    Vector3::new(0.0, 0.0, -GRAVITY)
}

pub const IMU_DIM: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PropagationError {
    #[error("no IMU samples supplied")]
    EmptySampleSeq,
    #[error("IMU timestamps must be strictly increasing")]
    NonIncreasingTime,
    #[error("requested interval [{0}, {1}] is not covered by the trajectory grid")]
    IntervalNotCovered(f64, f64),
}
