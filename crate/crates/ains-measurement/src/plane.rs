use ains_geometry::{skew, CpPlane, GeometryError, HessePlane, Pose, EPS_PLANE};
use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::jac::dm;
use crate::{FeatureJacobian, MeasError};

fn local_distance(pose: &Pose, n: &Vector3<f64>, d: f64) -> Result<f64, MeasError> {
    let di = d - n.dot(&pose.p);
    if di.abs() < EPS_PLANE {
        return Err(GeometryError::DegeneratePlane.into());
    }
    Ok(di)
}

/// `Π_I = (d - n^T p_I) R n`.
pub fn plane_transform_to_local(pose: &Pose, pi_g: &CpPlane) -> Result<CpPlane, MeasError> {
    let n = pi_g.normal();
    let di = local_distance(pose, &n, pi_g.d())?;
    Ok(CpPlane { pi: di * (pose.rot() * n) })
}

/// Closest-point plane Jacobian with additive feature error on `Π`.
pub fn plane_jacobian_cp(pose: &Pose, pi_g: &CpPlane) -> Result<FeatureJacobian, MeasError> {
    let r = pose.rot();
    let p = pose.p;
    let d = pi_g.d();
    let n = pi_g.normal();
    let di = local_distance(pose, &n, d)?;
    let rn = r * n;
    let np = n.dot(&p);
    let h_theta = di * skew(&rn);
    let h_p = -rn * n.transpose();
    let h_f = r * (di * Matrix3::identity() - n * p.transpose() + 2.0 * np * n * n.transpose()) / d;
    Ok(FeatureJacobian { h_theta: dm(&h_theta), h_p: dm(&h_p), h_f: dm(&h_f) })
}

/// Local `(θ, φ, d)` of a Hesse-form plane.
pub fn plane_measure_hesse(pose: &Pose, plane: &HessePlane) -> Result<Vector3<f64>, MeasError> {
    let ni = pose.rot() * plane.n;
    let di = plane.d - plane.n.dot(&pose.p);
    let (t, p) = HessePlane { n: ni, d: di }.angles()?;
    Ok(Vector3::new(t, p, di))
}

/// Hesse-form Jacobian; feature columns are `(θ, φ, d)` of the global plane.
pub fn plane_jacobian_hesse(pose: &Pose, plane: &HessePlane) -> Result<FeatureJacobian, MeasError> {
    let r = pose.rot();
    let p = pose.p;
    let ni = r * plane.n;
    HessePlane { n: ni, d: 1.0 }.angles()?;
    let (_, phi) = plane.angles()?;
    let n1 = plane.perp1()? * phi.cos();
    let n2 = plane.perp2()?;

    let rho2 = ni.x * ni.x + ni.y * ni.y;
    let rho = rho2.sqrt();
    let mut h_pi = DMatrix::zeros(3, 4);
    h_pi[(0, 0)] = -ni.y / rho2;
    h_pi[(0, 1)] = ni.x / rho2;
    h_pi[(1, 0)] = -ni.x * ni.z / rho;
    h_pi[(1, 1)] = -ni.y * ni.z / rho;
    h_pi[(1, 2)] = rho;
    h_pi[(2, 3)] = 1.0;

    // d(n_I, d_I) / d(dθ, p, θ, φ, d)
    let mut g_theta = DMatrix::zeros(4, 3);
    g_theta.view_mut((0, 0), (3, 3)).copy_from(&skew(&ni));
    let mut g_p = DMatrix::zeros(4, 3);
    g_p.view_mut((3, 0), (1, 3)).copy_from(&(-plane.n.transpose()));
    let mut g_f = DMatrix::zeros(4, 3);
    g_f.view_mut((0, 0), (3, 1)).copy_from(&(r * n1));
    g_f.view_mut((0, 1), (3, 1)).copy_from(&(r * n2));
    g_f[(3, 0)] = -p.dot(&n1);
    g_f[(3, 1)] = -p.dot(&n2);
    g_f[(3, 2)] = 1.0;
    Ok(FeatureJacobian { h_theta: &h_pi * g_theta, h_p: &h_pi * g_p, h_f: &h_pi * g_f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ains_geometry::Quat;

    #[test]
    fn transform_examples() {
        let pi = CpPlane::new(Vector3::new(0.0, 0.0, 2.0)).unwrap();
        assert_eq!(plane_transform_to_local(&Pose::default(), &pi).unwrap(), pi);
        let pose = Pose::new(Quat::identity(), Vector3::z());
        assert_eq!(plane_transform_to_local(&pose, &pi).unwrap().pi, Vector3::new(0.0, 0.0, 1.0));
        let on = Pose::new(Quat::identity(), Vector3::new(3.0, -1.0, 2.0));
        assert_eq!(plane_transform_to_local(&on, &pi), Err(GeometryError::DegeneratePlane.into()));
    }

    #[test]
    fn cp_jacobian_at_origin() {
        let pi = CpPlane::new(Vector3::new(0.0, 0.0, 2.0)).unwrap();
        let j = plane_jacobian_cp(&Pose::default(), &pi).unwrap();
        assert!((&j.h_f - DMatrix::<f64>::identity(3, 3)).norm() < 1e-15);
        let mut e = DMatrix::zeros(3, 3);
        e[(2, 2)] = -1.0;
        assert_eq!(j.h_p, e);
        assert_eq!(j.embed(18, Some(15)).columns(3, 9).norm(), 0.0);
    }

    #[test]
    fn rotation_block_orthogonal_to_local_normal() {
        let pose = Pose::new(Quat::new(0.3, -0.1, 0.2, 0.9), Vector3::new(0.5, 0.2, -0.3));
        let pi = CpPlane::new(Vector3::new(1.0, 2.0, 2.0)).unwrap();
        let j = plane_jacobian_cp(&pose, &pi).unwrap();
        let ni = pose.rot() * pi.normal();
        let nd = DMatrix::from_column_slice(1, 3, ni.as_slice());
        assert!((nd * &j.h_theta).norm() < 1e-10);
    }

    #[test]
    fn hesse_examples() {
        let h = HessePlane::new(Vector3::x(), 1.0);
        assert_eq!(plane_measure_hesse(&Pose::default(), &h).unwrap(), Vector3::new(0.0, 0.0, 1.0));
        let v = HessePlane::new(Vector3::z(), 1.0);
        assert_eq!(plane_measure_hesse(&Pose::default(), &v), Err(GeometryError::SingularElevation.into()));
        assert!(plane_jacobian_hesse(&Pose::default(), &v).is_err());
    }
}
