//! Rotation algebra and feature parameterizations for points, lines and planes.
//!
//! Quaternions follow the JPL convention: scalar last, and `R(q)` maps
//! global-frame vectors into the local (sensor) frame. The rotation error
//! is defined by `R = (I - [dθ]x) R_hat`, so a boxplus left-multiplies.

pub mod line;
pub mod plane;
pub mod point;
pub mod rotation;

pub use line::{LineOrthonormal, PluckerLine};
pub use plane::{cp_from_hesse, hesse_from_cp, CpPlane, HessePlane, EPS_PLANE};
pub use point::{PointEuclidean, PointSpherical};
pub use rotation::{exp_so3, log_so3, perp_basis, skew, Pose, Quat};

pub use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type MatD = DMatrix<f64>;
pub type VecD = DVector<f64>;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("degenerate line (zero normal or direction)")]
    DegenerateLine,
    #[error("degenerate plane (distance below threshold)")]
    DegeneratePlane,
    #[error("elevation too close to +-pi/2")]
    SingularElevation,
}
