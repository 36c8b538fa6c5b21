use nalgebra::{Matrix3, Vector3};

use crate::GeometryError;

/// Cartesian point, global or local frame depending on context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEuclidean {
    pub p_f: Vector3<f64>,
}

impl PointEuclidean {
    pub fn new(p_f: Vector3<f64>) -> Self {
        Self { p_f }
    }
}

/// Range, azimuth and elevation of a point: `p = r [cθ cφ, sθ cφ, sφ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSpherical {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

const ELEVATION_TOL: f64 = 1e-9;

impl PointSpherical {
    pub fn from_euclidean(p: &Vector3<f64>) -> Result<Self, GeometryError> {
        let r = p.norm();
        let rho = (p.x * p.x + p.y * p.y).sqrt();
        if r <= 0.0 || rho <= ELEVATION_TOL * r {
            return Err(GeometryError::SingularElevation);
        }
        Ok(Self { r, theta: p.y.atan2(p.x), phi: p.z.atan2(rho) })
    }

    pub fn to_euclidean(&self) -> Vector3<f64> {
        self.r * self.bearing()
    }

    pub fn bearing(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(ct * cp, st * cp, sp)
    }

    /// Unit azimuth direction `[-sθ, cθ, 0]`.
    pub fn perp1(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        Vector3::new(-st, ct, 0.0)
    }

    /// Unit elevation direction `[-cθ sφ, -sθ sφ, cφ]`.
    pub fn perp2(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(-ct * sp, -st * sp, cp)
    }

    /// `d p / d(r, θ, φ)`.
    pub fn jacobian(&self) -> Matrix3<f64> {
        let mut j = Matrix3::zeros();
        j.set_column(0, &self.bearing());
        j.set_column(1, &(self.r * self.phi.cos() * self.perp1()));
        j.set_column(2, &(self.r * self.perp2()));
        j
    }

    /// `d(r, θ, φ) / d p`, the inverse of [`Self::jacobian`].
    pub fn inverse_jacobian(&self) -> Matrix3<f64> {
        let mut j = Matrix3::zeros();
        j.set_row(0, &self.bearing().transpose());
        j.set_row(1, &(self.perp1().transpose() / (self.r * self.phi.cos())));
        j.set_row(2, &(self.perp2().transpose() / self.r));
        j
    }

    pub fn boxplus(&self, d: &Vector3<f64>) -> Self {
        Self { r: self.r + d.x, theta: self.theta + d.y, phi: self.phi + d.z }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_x() {
        let s = PointSpherical::from_euclidean(&Vector3::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!((s.r, s.theta, s.phi), (1.0, 0.0, 0.0));
    }

    #[test]
    fn zenith_is_singular() {
        let e = PointSpherical::from_euclidean(&Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(e, Err(GeometryError::SingularElevation));
    }

    #[test]
    fn round_trip_and_jacobians() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = Vector3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let s = PointSpherical::from_euclidean(&p).unwrap();
            assert!((s.to_euclidean() - p).norm() < 1e-10);
            assert!((s.jacobian() * s.inverse_jacobian() - Matrix3::identity()).norm() < 1e-9);
            let h = 1e-6;
            for k in 0..3 {
                let mut d = Vector3::zeros();
                d[k] = h;
                let fd = (s.boxplus(&d).to_euclidean() - s.boxplus(&-d).to_euclidean()) / (2.0 * h);
                assert!((fd - s.jacobian().column(k)).norm() < 1e-7 * (1.0 + s.r));
            }
        }
    }
}
