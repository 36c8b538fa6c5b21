use ains_geometry::{perp_basis, skew, PointEuclidean, PointSpherical, Pose};
use nalgebra::{DMatrix, DVector, Matrix2x3, Vector3};

use crate::jac::dm;
use crate::{FeatureJacobian, MeasError};

/// Point sensors. Bearings are normalized image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointSensorModel {
    /// `|p|`
    RangeOnly,
    /// `[x/z, y/z]`
    MonoBearing,
    /// `[|p|, x/z, y/z]` (depth camera)
    RangeBearing,
    /// `[x/z, (x - b)/z, y/z]` for a rectified pair with baseline `b`
    Stereo { baseline: f64 },
}

impl PointSensorModel {
    pub fn dim(&self) -> usize {
        match self {
            Self::RangeOnly => 1,
            Self::MonoBearing => 2,
            Self::RangeBearing | Self::Stereo { .. } => 3,
        }
    }

    pub fn needs_front(&self) -> bool {
        !matches!(self, Self::RangeOnly)
    }
}

/// `R (p_f - p_I)`.
pub fn point_transform(pose: &Pose, p_g: &PointEuclidean) -> PointEuclidean {
    PointEuclidean::new(pose.rot() * (p_g.p_f - pose.p))
}

const MIN_DEPTH: f64 = 1e-9;

fn check(model: &PointSensorModel, p: &Vector3<f64>) -> Result<(), MeasError> {
    if model.needs_front() && p.z <= MIN_DEPTH {
        return Err(MeasError::BehindCamera);
    }
    if p.norm() <= MIN_DEPTH {
        return Err(MeasError::ZeroRange);
    }
    Ok(())
}

/// Noise-free measurement of a point in the sensor frame.
pub fn point_measure(model: &PointSensorModel, p_local: &Vector3<f64>) -> Result<DVector<f64>, MeasError> {
    check(model, p_local)?;
    let p = p_local;
    Ok(match model {
        PointSensorModel::RangeOnly => DVector::from_vec(vec![p.norm()]),
        PointSensorModel::MonoBearing => DVector::from_vec(vec![p.x / p.z, p.y / p.z]),
        PointSensorModel::RangeBearing => DVector::from_vec(vec![p.norm(), p.x / p.z, p.y / p.z]),
        PointSensorModel::Stereo { baseline } => DVector::from_vec(vec![p.x / p.z, (p.x - baseline) / p.z, p.y / p.z]),
    })
}

/// Jacobian of [`point_measure`] with respect to the local point.
pub fn point_projection_jacobian(model: &PointSensorModel, p_local: &Vector3<f64>) -> Result<DMatrix<f64>, MeasError> {
    check(model, p_local)?;
    let p = p_local;
    let r = p.norm();
    let iz = 1.0 / p.z;
    let range = [p.x / r, p.y / r, p.z / r];
    let bx = [iz, 0.0, -p.x * iz * iz];
    let by = [0.0, iz, -p.y * iz * iz];
    let rows: Vec<[f64; 3]> = match model {
        PointSensorModel::RangeOnly => vec![range],
        PointSensorModel::MonoBearing => vec![bx, by],
        PointSensorModel::RangeBearing => vec![range, bx, by],
        PointSensorModel::Stereo { baseline } => vec![bx, [iz, 0.0, -(p.x - baseline) * iz * iz], by],
    };
    Ok(DMatrix::from_fn(rows.len(), 3, |i, j| rows[i][j]))
}

/// Rows `[b⊥1^T; b⊥2^T]` orthogonal to the bearing of `p_local`.
///
/// The exact bearing Jacobian equals `T * bearing_perp_rows` for an
/// invertible 2x2 `T`, so both share the same null space.
pub fn bearing_perp_rows(p_local: &Vector3<f64>) -> Matrix2x3<f64> {
    let (b1, b2) = perp_basis(p_local);
    Matrix2x3::from_rows(&[b1.transpose(), b2.transpose()])
}

fn pose_blocks(pose: &Pose, p_g: &Vector3<f64>, hp: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let r = pose.rot();
    let local = r * (p_g - pose.p);
    let h_theta = hp * dm(&skew(&local));
    let h_f = hp * dm(&r);
    (h_theta, -&h_f, h_f)
}

/// `H = H_proj R [ [p_f - p_I]x R^T, 0, 0, 0, -I | I ]`.
pub fn point_jacobian(model: &PointSensorModel, pose: &Pose, p_g: &PointEuclidean) -> Result<FeatureJacobian, MeasError> {
    let local = point_transform(pose, p_g).p_f;
    let hp = point_projection_jacobian(model, &local)?;
    let (h_theta, h_p, h_f) = pose_blocks(pose, &p_g.p_f, &hp);
    Ok(FeatureJacobian { h_theta, h_p, h_f })
}

/// Point Jacobian with the feature in range/azimuth/elevation coordinates.
pub fn point_jacobian_spherical(model: &PointSensorModel, pose: &Pose, s: &PointSpherical) -> Result<FeatureJacobian, MeasError> {
    let mut j = point_jacobian(model, pose, &PointEuclidean::new(s.to_euclidean()))?;
    j.h_f = &j.h_f * dm(&s.jacobian());
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ains_geometry::Quat;

    #[test]
    fn transform_examples() {
        let p = PointEuclidean::new(Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(point_transform(&Pose::default(), &p), p);
        let pose = Pose::new(Quat::identity(), Vector3::z());
        assert_eq!(point_transform(&pose, &PointEuclidean::new(Vector3::z())).p_f, Vector3::zeros());
        let pose = Pose::new(Quat::new(0.2, -0.4, 0.1, 0.8), Vector3::new(0.5, -1.0, 2.0));
        let local = point_transform(&pose, &p).p_f;
        let back = pose.rot().transpose() * local + pose.p;
        assert!((back - p.p_f).norm() < 1e-12);
    }

    #[test]
    fn measure_examples() {
        let z = point_measure(&PointSensorModel::RangeOnly, &Vector3::new(3.0, 4.0, 0.0)).unwrap();
        assert_eq!(z[0], 5.0);
        let z = point_measure(&PointSensorModel::MonoBearing, &Vector3::new(1.0, 2.0, 2.0)).unwrap();
        assert_eq!(z.as_slice(), &[0.5, 1.0]);
        let z = point_measure(&PointSensorModel::Stereo { baseline: 0.1 }, &Vector3::new(0.1, 0.0, 1.0)).unwrap();
        assert_eq!(z.as_slice(), &[0.1, 0.0, 0.0]);
        let e = point_measure(&PointSensorModel::MonoBearing, &Vector3::new(0.0, 0.0, -1.0));
        assert_eq!(e, Err(MeasError::BehindCamera));
        assert_eq!(point_measure(&PointSensorModel::RangeOnly, &Vector3::zeros()), Err(MeasError::ZeroRange));
    }

    #[test]
    fn range_row_at_identity() {
        let j = point_jacobian(&PointSensorModel::RangeOnly, &Pose::default(), &PointEuclidean::new(Vector3::z())).unwrap();
        assert_eq!(j.h_f.as_slice(), &[0.0, 0.0, 1.0]);
        let full = j.embed(18, Some(15));
        assert_eq!(full.columns(3, 9).norm(), 0.0);
    }

    #[test]
    fn bearing_rows_annihilate_bearing() {
        for p in [Vector3::new(0.3, -0.2, 2.0), Vector3::new(-1.0, 0.5, 0.7), Vector3::new(0.0, 0.0, 1.0)] {
            let hb = bearing_perp_rows(&p);
            assert!((hb * p.normalize()).norm() < 1e-12);
            let exact = point_projection_jacobian(&PointSensorModel::MonoBearing, &p).unwrap();
            assert!((&exact * DVector::from_column_slice(p.as_slice())).norm() < 1e-12);
            // the exact rows lie in the span of the perpendicular rows
            let hbd = DMatrix::from_column_slice(2, 3, hb.as_slice());
            let t = &exact * hbd.transpose();
            assert!((&t * &hbd - &exact).norm() < 1e-12);
            assert!(t.determinant().abs() > 1e-6);
        }
    }
}
