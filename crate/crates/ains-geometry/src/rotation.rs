use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};

/// Cross-product matrix, `skew(v) * w == v.cross(&w)`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Matrix exponential of `skew(v)` (Rodrigues).
pub fn exp_so3(v: &Vector3<f64>) -> Matrix3<f64> {
    let th = v.norm();
    let k = skew(v);
    if th < 1e-8 {
        return Matrix3::identity() + k + 0.5 * k * k;
    }
    Matrix3::identity() + (th.sin() / th) * k + ((1.0 - th.cos()) / (th * th)) * k * k
}

/// Two unit vectors completing `b` to an orthonormal frame.
///
/// The first is `b x e_i` for the canonical axis with the smallest
/// component of `b`; the second is `b x perp1`.
pub fn perp_basis(b: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let b = b.normalize();
    let a = b.abs();
    let i = if a.x <= a.y && a.x <= a.z {
        0
    } else if a.y <= a.z {
        1
    } else {
        2
    };
    let e = Vector3::ith(i, 1.0);
    let p1 = b.cross(&e).normalize();
    let p2 = b.cross(&p1);
    (p1, p2)
}

/// JPL unit quaternion, scalar last.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
}

impl Default for Quat {
    fn default() -> Self {
        Self::identity()
    }
}

impl Quat {
    pub fn identity() -> Self {
        Self { x: 0.0, y: 0.0, z: 0.0, w: 1.0 }
    }

    pub fn new(x: f64, y: f64, z: f64, w: f64) -> Self {
        Self { x, y, z, w }.normalized()
    }

    pub fn vec(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z + self.w * self.w).sqrt()
    }

    /// Normalizes and flips sign so that `w >= 0`.
    pub fn normalized(self) -> Self {
        let n = self.norm();
        let s = if self.w < 0.0 { -1.0 / n } else { 1.0 / n };
        Self { x: self.x * s, y: self.y * s, z: self.z * s, w: self.w * s }
    }

    /// Rotation matrix, maps global vectors to the local frame.
    pub fn rot(&self) -> Matrix3<f64> {
        let q = self.vec();
        (2.0 * self.w * self.w - 1.0) * Matrix3::identity() - 2.0 * self.w * skew(&q) + 2.0 * q * q.transpose()
    }

    pub fn from_rot(r: &Matrix3<f64>) -> Self {
        let h = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*r));
        Self::new(-h.i, -h.j, -h.k, h.w)
    }

    /// Quaternion with `rot() == exp(-skew(dtheta))`.
    pub fn from_small_angle(dtheta: &Vector3<f64>) -> Self {
        let th = dtheta.norm();
        if th < 1e-12 {
            return Self::new(0.5 * dtheta.x, 0.5 * dtheta.y, 0.5 * dtheta.z, 1.0);
        }
        let s = (0.5 * th).sin() / th;
        Self::new(s * dtheta.x, s * dtheta.y, s * dtheta.z, (0.5 * th).cos())
    }

    /// JPL product; `(a * b).rot() == a.rot() * b.rot()`.
    pub fn mul(&self, p: &Quat) -> Quat {
        let qv = self.vec();
        let pv = p.vec();
        let v = self.w * pv + p.w * qv - qv.cross(&pv);
        let w = self.w * p.w - qv.dot(&pv);
        Quat { x: v.x, y: v.y, z: v.z, w }
    }

    /// Raw JPL product without normalization, used by the integrator.
    pub fn omega_product(omega: &Vector3<f64>, q: &Quat) -> [f64; 4] {
        let qv = q.vec();
        let v = q.w * omega - omega.cross(&qv);
        [v.x, v.y, v.z, -omega.dot(&qv)]
    }

    /// Left perturbation, `R <- exp(-skew(dtheta)) R`.
    pub fn boxplus(&self, dtheta: &Vector3<f64>) -> Quat {
        Quat::from_small_angle(dtheta).mul(self).normalized()
    }

    /// Error angle with `other.rot() ~ exp(-skew(e)) self.rot()`.
    pub fn boxminus(&self, other: &Quat) -> Vector3<f64> {
        let dr = other.rot() * self.rot().transpose();
        -log_so3(&dr)
    }
}

/// Inverse of [`exp_so3`] for rotation angles below pi.
pub fn log_so3(r: &Matrix3<f64>) -> Vector3<f64> {
    let c = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let th = c.acos();
    let w = Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
    if th < 1e-8 {
        return 0.5 * w;
    }
    if std::f64::consts::PI - th < 1e-6 {
        let rot = Rotation3::from_matrix_unchecked(*r);
        return rot.scaled_axis();
    }
    w * (th / (2.0 * th.sin()))
}

/// Sensor pose: orientation (global to local) and global position.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub q: Quat,
    pub p: Vector3<f64>,
}

impl Pose {
    pub fn new(q: Quat, p: Vector3<f64>) -> Self {
        Self { q, p }
    }

    pub fn rot(&self) -> Matrix3<f64> {
        self.q.rot()
    }

    /// Applies `(dtheta, dp)` with the left rotation error.
    pub fn boxplus(&self, dtheta: &Vector3<f64>, dp: &Vector3<f64>) -> Pose {
        Pose { q: self.q.boxplus(dtheta), p: self.p + dp }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rvec(rng: &mut ChaCha8Rng) -> Vector3<f64> {
        Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    #[test]
    fn skew_examples() {
        let s = skew(&Vector3::new(1.0, 0.0, 0.0)) * Vector3::new(0.0, 1.0, 0.0);
        assert_eq!(s, Vector3::new(0.0, 0.0, 1.0));
        let v = Vector3::new(1.0, 2.0, 3.0);
        assert_eq!(skew(&v) * v, Vector3::zeros());
        let m = Matrix3::new(0.0, -3.0, 2.0, 3.0, 0.0, -1.0, -2.0, 1.0, 0.0);
        assert_eq!(skew(&v), m);
    }

    #[test]
    fn skew_product_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let v = rvec(&mut rng);
            let w = rvec(&mut rng);
            let lhs = skew(&v) * skew(&w);
            let rhs = w * v.transpose() - v.dot(&w) * Matrix3::identity();
            assert!((lhs - rhs).norm() < 1e-12);
            assert!((skew(&v) + skew(&v).transpose()).norm() == 0.0);
        }
    }

    #[test]
    fn quaternion_rotation_is_proper() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let q = Quat::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            assert!((q.norm() - 1.0).abs() < 1e-12);
            let r = q.rot();
            assert!((r * r.transpose() - Matrix3::identity()).norm() < 1e-10);
            assert!((r.determinant() - 1.0).abs() < 1e-10);
            let back = Quat::from_rot(&r);
            assert!((back.rot() - r).norm() < 1e-10);
        }
    }

    #[test]
    fn product_composes_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = Quat::from_small_angle(&(2.0 * rvec(&mut rng)));
            let b = Quat::from_small_angle(&(2.0 * rvec(&mut rng)));
            assert!((a.mul(&b).rot() - a.rot() * b.rot()).norm() < 1e-12);
        }
    }

    #[test]
    fn small_angle_matches_exp() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let v = rvec(&mut rng);
            assert!((Quat::from_small_angle(&v).rot() - exp_so3(&(-v))).norm() < 1e-12);
            assert!((log_so3(&exp_so3(&v)) - v).norm() < 1e-10);
        }
    }

    #[test]
    fn boxplus_boxminus_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let q = Quat::from_small_angle(&(3.0 * rvec(&mut rng)));
            let d = 0.3 * rvec(&mut rng);
            let q2 = q.boxplus(&d);
            assert!((q.boxminus(&q2) - d).norm() < 1e-10);
            let first = (Matrix3::identity() - skew(&(1e-6 * d))) * q.rot();
            assert!((q.boxplus(&(1e-6 * d)).rot() - first).norm() < 1e-11);
        }
    }

    #[test]
    fn yaw_about_z() {
        let q = Quat::from_small_angle(&Vector3::new(0.0, 0.0, 0.3));
        let r = q.rot();
        // rotating the frame by +0.3 about z maps global x to local (cos, -sin)
        assert!((r * Vector3::x() - Vector3::new(0.3f64.cos(), -(0.3f64.sin()), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn perp_basis_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let b = rvec(&mut rng).normalize();
            let (p1, p2) = perp_basis(&b);
            assert!(p1.dot(&b).abs() < 1e-12 && p2.dot(&b).abs() < 1e-12);
            assert!(p1.dot(&p2).abs() < 1e-12);
            assert!((p1.norm() - 1.0).abs() < 1e-12 && (p2.norm() - 1.0).abs() < 1e-12);
        }
    }
}
