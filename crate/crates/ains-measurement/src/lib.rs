//! Measurement functions and analytic Jacobians for point, line, plane and
//! global measurements.
//!
//! Every Jacobian is split into the pose blocks (`dθ`, `p`) and the
//! feature block; the IMU bias and velocity columns are always zero.
//! The sensor frame coincides with the IMU frame.

pub mod check;
mod global;
mod jac;
mod line;
mod plane;
mod point;

pub use global::{global_measure_and_jacobian, GlobalMeasModel};
pub use jac::FeatureJacobian;
pub use line::{
    line_direct_measure_and_jacobian, line_jacobian, line_project_and_measure, line_projection, line_transform_to_local, Intrinsics,
    LineObservation, LineProjection,
};
pub use plane::{plane_jacobian_cp, plane_jacobian_hesse, plane_measure_hesse, plane_transform_to_local};
pub use point::{
    bearing_perp_rows, point_jacobian, point_jacobian_spherical, point_measure, point_projection_jacobian, point_transform,
    PointSensorModel,
};

use ains_geometry::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum MeasError {
    #[error("point is behind the camera")]
    BehindCamera,
    #[error("point at zero range")]
    ZeroRange,
    #[error("projected line is degenerate")]
    DegenerateProjection,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
