use ains_geometry::{skew, PluckerLine, Pose};
use nalgebra::{DMatrix, Matrix2x3, Matrix3, Vector2, Vector3, Vector4};

use crate::jac::dm;
use crate::{FeatureJacobian, MeasError};

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub f1: f64,
    pub f2: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for Intrinsics {
    fn default() -> Self {
        Self::normalized()
    }
}

impl Intrinsics {
    pub fn normalized() -> Self {
        Self { f1: 1.0, f2: 1.0, c1: 0.0, c2: 0.0 }
    }

    /// Line projection matrix, `l' = K n` in the sensor frame.
    pub fn k_line(&self) -> Matrix3<f64> {
        Matrix3::new(self.f2, 0.0, 0.0, 0.0, self.f1, 0.0, -self.f2 * self.c1, -self.f1 * self.c2, self.f1 * self.f2)
    }

    pub fn k_point(&self) -> Matrix3<f64> {
        Matrix3::new(self.f1, 0.0, self.c1, 0.0, self.f2, self.c2, 0.0, 0.0, 1.0)
    }

    /// Homogeneous pixel `[u, v, 1]` of a point in front of the camera.
    pub fn project_point(&self, p_local: &Vector3<f64>) -> Result<Vector3<f64>, MeasError> {
        if p_local.z <= 1e-9 {
            return Err(MeasError::BehindCamera);
        }
        Ok(Vector3::new(self.f1 * p_local.x / p_local.z + self.c1, self.f2 * p_local.y / p_local.z + self.c2, 1.0))
    }
}

/// Two image points measured on a line segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineObservation {
    pub xs: Vector3<f64>,
    pub xe: Vector3<f64>,
}

impl LineObservation {
    pub fn new(us: f64, vs: f64, ue: f64, ve: f64) -> Self {
        Self { xs: Vector3::new(us, vs, 1.0), xe: Vector3::new(ue, ve, 1.0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineProjection {
    pub k: Matrix3<f64>,
    pub l_prime: Vector3<f64>,
}

/// `n_I = R (n - [p_I]x v)`, `v_I = R v`.
pub fn line_transform_to_local(pose: &Pose, l: &PluckerLine) -> PluckerLine {
    let r = pose.rot();
    PluckerLine { n: r * (l.n - pose.p.cross(&l.v)), v: r * l.v }
}

pub fn line_projection(intr: &Intrinsics, l_local: &PluckerLine) -> LineProjection {
    let k = intr.k_line();
    LineProjection { k, l_prime: k * l_local.n }
}

fn image_line_norm(l: &Vector3<f64>) -> Result<f64, MeasError> {
    let ln = (l.x * l.x + l.y * l.y).sqrt();
    if ln <= 1e-12 * l.norm().max(1e-300) {
        return Err(MeasError::DegenerateProjection);
    }
    Ok(ln)
}

/// Signed distances of the two observed points to the projected line.
pub fn line_project_and_measure(intr: &Intrinsics, l_local: &PluckerLine, obs: &LineObservation) -> Result<Vector2<f64>, MeasError> {
    let l = line_projection(intr, l_local).l_prime;
    let ln = image_line_norm(&l)?;
    Ok(Vector2::new(obs.xs.dot(&l), obs.xe.dot(&l)) / ln)
}

fn h_l(l: &Vector3<f64>, obs: &LineObservation) -> Result<Matrix2x3<f64>, MeasError> {
    let ln = image_line_norm(l)?;
    let row = |x: &Vector3<f64>| {
        let e = x.dot(l);
        let ln2 = ln * ln;
        [(x.x - l.x * e / ln2) / ln, (x.y - l.y * e / ln2) / ln, 1.0 / ln]
    };
    let a = row(&obs.xs);
    let b = row(&obs.xe);
    Ok(Matrix2x3::new(a[0], a[1], a[2], b[0], b[1], b[2]))
}

/// Projective line Jacobian; feature columns are `(dθ_L, dφ_L)`.
pub fn line_jacobian(pose: &Pose, l_g: &PluckerLine, intr: &Intrinsics, obs: &LineObservation) -> Result<FeatureJacobian, MeasError> {
    let r = pose.rot();
    let p = pose.p;
    let local = line_transform_to_local(pose, l_g);
    let k = intr.k_line();
    let hl = h_l(&(k * local.n), obs)?;
    let w1 = l_g.n.norm();
    let w2 = l_g.v.norm();
    let hlk = hl * k;
    let h_theta = hlk * skew(&local.n);
    let h_p = hlk * r * skew(&l_g.v);
    let h_l2 = skew(&l_g.n) - skew(&p) * skew(&l_g.v);
    let h_l3 = -((w2 / w1) * l_g.n + (w1 / w2) * p.cross(&l_g.v));
    let mut f = DMatrix::zeros(2, 4);
    f.view_mut((0, 0), (2, 3)).copy_from(&(hlk * r * h_l2));
    f.view_mut((0, 3), (2, 1)).copy_from(&(hlk * r * h_l3));
    Ok(FeatureJacobian { h_theta: dm(&h_theta), h_p: dm(&h_p), h_f: f })
}

/// Direct 3D line measurement `[ [v_m]x v_I ; |n_I| / |v_I| ]` and its Jacobian.
pub fn line_direct_measure_and_jacobian(
    pose: &Pose,
    l_g: &PluckerLine,
    v_m: &Vector3<f64>,
) -> Result<(Vector4<f64>, FeatureJacobian), MeasError> {
    let l = PluckerLine::new(l_g.n, l_g.v)?;
    let r = pose.rot();
    let local = line_transform_to_local(pose, &l);
    let (n, v) = (local.n, local.v);
    let (nn, nv) = (n.norm(), v.norm());
    let c = v_m.cross(&v);
    let z = Vector4::new(c.x, c.y, c.z, nn / nv);

    // d z / d(n_I, v_I)
    let mut dz = DMatrix::zeros(4, 6);
    dz.view_mut((0, 3), (3, 3)).copy_from(&skew(v_m));
    dz.view_mut((3, 0), (1, 3)).copy_from(&(n.transpose() / (nn * nv)));
    dz.view_mut((3, 3), (1, 3)).copy_from(&(-nn / (nv * nv * nv) * v.transpose()));

    let w1 = l.n.norm();
    let w2 = l.v.norm();
    let p = pose.p;
    let mut dth = DMatrix::zeros(6, 3);
    dth.view_mut((0, 0), (3, 3)).copy_from(&skew(&n));
    dth.view_mut((3, 0), (3, 3)).copy_from(&skew(&v));
    let mut dp = DMatrix::zeros(6, 3);
    dp.view_mut((0, 0), (3, 3)).copy_from(&(r * skew(&l.v)));
    let mut df = DMatrix::zeros(6, 4);
    df.view_mut((0, 0), (3, 3)).copy_from(&(r * (skew(&l.n) - skew(&p) * skew(&l.v))));
    df.view_mut((0, 3), (3, 1)).copy_from(&(r * -((w2 / w1) * l.n + (w1 / w2) * p.cross(&l.v))));
    df.view_mut((3, 0), (3, 3)).copy_from(&(r * skew(&l.v)));
    df.view_mut((3, 3), (3, 1)).copy_from(&(r * ((w1 / w2) * l.v)));
    Ok((z, FeatureJacobian { h_theta: &dz * dth, h_p: &dz * dp, h_f: &dz * df }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ains_geometry::Quat;

    fn pose() -> Pose {
        Pose::new(Quat::new(0.1, 0.3, -0.2, 0.9), Vector3::new(0.4, -0.3, 0.2))
    }

    #[test]
    fn identity_pose_keeps_line() {
        let l = PluckerLine::from_endpoints(&Vector3::new(1.0, 0.0, 3.0), &Vector3::new(0.0, 1.0, 4.0)).unwrap();
        assert_eq!(line_transform_to_local(&Pose::default(), &l), l);
    }

    #[test]
    fn transform_matches_endpoint_transform() {
        let (a, b) = (Vector3::new(1.0, 0.5, 3.0), Vector3::new(-0.5, 1.0, 4.0));
        let ps = pose();
        let l = PluckerLine::from_endpoints(&a, &b).unwrap();
        let local = line_transform_to_local(&ps, &l);
        let r = ps.rot();
        let direct = PluckerLine::from_endpoints(&(r * (a - ps.p)), &(r * (b - ps.p))).unwrap();
        assert!((local.n - direct.n).norm() < 1e-10 && (local.v - direct.v).norm() < 1e-10);
        let rot_only = Pose::new(ps.q, Vector3::zeros());
        assert_eq!(line_transform_to_local(&rot_only, &l).v, r * l.v);
    }

    #[test]
    fn on_line_observation_has_zero_residual() {
        let intr = Intrinsics { f1: 460.0, f2: 455.0, c1: 320.0, c2: 240.0 };
        let (a, b) = (Vector3::new(1.0, 0.5, 3.0), Vector3::new(-0.5, 1.0, 4.0));
        let l = PluckerLine::from_endpoints(&a, &b).unwrap();
        let obs = LineObservation { xs: intr.project_point(&a).unwrap(), xe: intr.project_point(&b).unwrap() };
        let z = line_project_and_measure(&intr, &l, &obs).unwrap();
        assert!(z.norm() < 1e-9);
        let scaled = PluckerLine { n: 10.0 * l.n, v: l.v };
        let obs2 = LineObservation::new(100.0, 80.0, 400.0, 300.0);
        let d = line_project_and_measure(&intr, &l, &obs2).unwrap() - line_project_and_measure(&intr, &scaled, &obs2).unwrap();
        assert!(d.norm() < 1e-9);
    }

    #[test]
    fn unit_intrinsics_give_identity_projection() {
        assert_eq!(Intrinsics::normalized().k_line(), Matrix3::identity());
        let l = PluckerLine::from_endpoints(&Vector3::new(1.0, 0.5, 3.0), &Vector3::new(-0.5, 1.0, 4.0)).unwrap();
        assert_eq!(line_projection(&Intrinsics::normalized(), &l).l_prime, l.n);
    }

    #[test]
    fn projection_matrix_matches_endpoint_construction() {
        let intr = Intrinsics { f1: 420.0, f2: 470.0, c1: 300.0, c2: 250.0 };
        let pts =
            [(Vector3::new(1.0, 0.5, 3.0), Vector3::new(-0.5, 1.0, 4.0)), (Vector3::new(-2.0, 0.1, 5.0), Vector3::new(0.3, -1.0, 2.0))];
        for (a, b) in pts {
            let l = PluckerLine::from_endpoints(&a, &b).unwrap();
            let lp = line_projection(&intr, &l).l_prime;
            let kp = intr.k_point();
            let img = (kp * a).cross(&(kp * b));
            assert!(lp.normalize().cross(&img.normalize()).norm() < 1e-10);
        }
    }

    #[test]
    fn jacobian_annihilates_projected_line_and_is_sparse() {
        let intr = Intrinsics { f1: 460.0, f2: 460.0, c1: 320.0, c2: 240.0 };
        let ps = pose();
        let (a, b) = (Vector3::new(1.0, 0.5, 3.0), Vector3::new(-0.5, 1.0, 4.0));
        let l = PluckerLine::from_endpoints(&a, &b).unwrap();
        let local = line_transform_to_local(&ps, &l);
        let obs = LineObservation {
            xs: intr.project_point(&(ps.rot() * (a - ps.p))).unwrap(),
            xe: intr.project_point(&(ps.rot() * (b - ps.p))).unwrap(),
        };
        let lp = intr.k_line() * local.n;
        assert!((h_l(&lp, &obs).unwrap() * lp).norm() < 1e-10 * lp.norm());
        let h = line_jacobian(&ps, &l, &intr, &obs).unwrap().embed(19, Some(15));
        assert_eq!(h.columns(3, 9).norm(), 0.0);
    }

    #[test]
    fn direct_measurement_examples() {
        let l = PluckerLine::from_endpoints(&Vector3::new(1.0, 0.0, 0.0), &Vector3::new(1.0, 1.0, 0.0)).unwrap();
        let (z, _) = line_direct_measure_and_jacobian(&Pose::default(), &l, &Vector3::y()).unwrap();
        assert!(z.fixed_rows::<3>(0).norm() < 1e-15);
        assert!((z[3] - 1.0).abs() < 1e-15);
    }
}
