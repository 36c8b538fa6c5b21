use ains_geometry::PointEuclidean;
use ains_geometry::Pose;
use ains_measurement::{
    line_jacobian, line_project_and_measure, line_transform_to_local, plane_jacobian_cp, plane_jacobian_hesse, plane_measure_hesse,
    plane_transform_to_local, point_jacobian, point_measure, point_transform, FeatureJacobian, Intrinsics, LineObservation,
    PointSensorModel,
};
use nalgebra::{DVector, Vector3};

use crate::{EstError, StateFeature};

/// One exteroceptive reading of a feature.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    /// Point reading; bearings in normalized image coordinates.
    Point { model: PointSensorModel, z: DVector<f64> },
    /// Two pixels on the image of a line.
    Line(LineObservation),
    /// Closest point of a plane in the sensor frame.
    CpPlane(Vector3<f64>),
    /// Azimuth, elevation and distance of a plane in the sensor frame.
    HessePlane(Vector3<f64>),
}

/// Camera model and measurement noise standard deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorNoise {
    pub intrinsics: Intrinsics,
    /// Pixels.
    pub sigma_px: f64,
    /// Meters.
    pub sigma_range: f64,
    /// Meters, per closest-point component and Hesse distance.
    pub sigma_plane: f64,
    /// Radians, Hesse azimuth and elevation.
    pub sigma_plane_angle: f64,
}

impl Default for SensorNoise {
    fn default() -> Self {
        Self {
            intrinsics: Intrinsics { f1: 460.0, f2: 460.0, c1: 320.0, c2: 240.0 },
            sigma_px: 1.0,
            sigma_range: 0.02,
            sigma_plane: 0.01,
            sigma_plane_angle: 0.01,
        }
    }
}

impl SensorNoise {
    /// Per-row standard deviation of `obs`.
    pub fn sigmas(&self, obs: &Observation) -> DVector<f64> {
        let b = self.sigma_px / self.intrinsics.f1;
        let v: Vec<f64> = match obs {
            Observation::Point { model, .. } => match model {
                PointSensorModel::RangeOnly => vec![self.sigma_range],
                PointSensorModel::MonoBearing => vec![b; 2],
                PointSensorModel::RangeBearing => vec![self.sigma_range, b, b],
                PointSensorModel::Stereo { .. } => vec![b; 3],
            },
            Observation::Line(_) => vec![self.sigma_px; 2],
            Observation::CpPlane(_) => vec![self.sigma_plane; 3],
            Observation::HessePlane(_) => vec![self.sigma_plane_angle, self.sigma_plane_angle, self.sigma_plane],
        };
        DVector::from_vec(v)
    }

    /// Scales every standard deviation by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            sigma_px: k * self.sigma_px,
            sigma_range: k * self.sigma_range,
            sigma_plane: k * self.sigma_plane,
            sigma_plane_angle: k * self.sigma_plane_angle,
            ..*self
        }
    }
}

fn wrap(a: f64) -> f64 {
    (a + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI
}

/// Noise-free reading of `feat` from `pose`, in the same form as `like`.
pub fn measure(like: &Observation, pose: &Pose, feat: &StateFeature, noise: &SensorNoise) -> Result<DVector<f64>, EstError> {
    Ok(match (like, feat) {
        (Observation::Point { model, .. }, StateFeature::Point(p)) => {
            point_measure(model, &point_transform(pose, &PointEuclidean::new(*p)).p_f)?
        }
        (Observation::Line(obs), StateFeature::Line(l)) => {
            let d = line_project_and_measure(&noise.intrinsics, &line_transform_to_local(pose, l), obs)?;
            DVector::from_column_slice(d.as_slice())
        }
        (Observation::CpPlane(_), StateFeature::CpPlane(pl)) => {
            DVector::from_column_slice(plane_transform_to_local(pose, pl)?.pi.as_slice())
        }
        (Observation::HessePlane(_), StateFeature::HessePlane(h)) => DVector::from_column_slice(plane_measure_hesse(pose, h)?.as_slice()),
        _ => return Err(EstError::ObservationMismatch),
    })
}

/// Residual `z - h(estimate)`, the Jacobian at the linearization point and
/// the per-row noise standard deviations.
pub fn predict(
    obs: &Observation,
    pose_est: &Pose,
    feat_est: &StateFeature,
    pose_lin: &Pose,
    feat_lin: &StateFeature,
    noise: &SensorNoise,
) -> Result<(DVector<f64>, FeatureJacobian, DVector<f64>), EstError> {
    let h = measure(obs, pose_est, feat_est, noise)?;
    let mut r = match obs {
        Observation::Point { z, .. } => z - &h,
        Observation::Line(_) => -h,
        Observation::CpPlane(z) | Observation::HessePlane(z) => DVector::from_column_slice(z.as_slice()) - &h,
    };
    if matches!(obs, Observation::HessePlane(_)) {
        r[0] = wrap(r[0]);
    }
    let j = match (obs, feat_lin) {
        (Observation::Point { model, .. }, StateFeature::Point(p)) => point_jacobian(model, pose_lin, &PointEuclidean::new(*p))?,
        (Observation::Line(o), StateFeature::Line(l)) => line_jacobian(pose_lin, l, &noise.intrinsics, o)?,
        (Observation::CpPlane(_), StateFeature::CpPlane(pl)) => plane_jacobian_cp(pose_lin, pl)?,
        (Observation::HessePlane(_), StateFeature::HessePlane(hp)) => plane_jacobian_hesse(pose_lin, hp)?,
        _ => return Err(EstError::ObservationMismatch),
    };
    Ok((r, j, noise.sigmas(obs)))
}
