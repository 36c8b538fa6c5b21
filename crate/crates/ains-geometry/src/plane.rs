use nalgebra::Vector3;

use crate::GeometryError;

/// Smallest plane distance accepted by the closest-point form (m).
pub const EPS_PLANE: f64 = 1e-6;

/// Closest point of a plane to the origin, `Π = d n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpPlane {
    pub pi: Vector3<f64>,
}

/// Plane as unit normal and distance, `n^T x = d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessePlane {
    pub n: Vector3<f64>,
    pub d: f64,
}

impl CpPlane {
    pub fn new(pi: Vector3<f64>) -> Result<Self, GeometryError> {
        if pi.norm() <= EPS_PLANE {
            return Err(GeometryError::DegeneratePlane);
        }
        Ok(Self { pi })
    }

    pub fn from_hesse(h: &HessePlane) -> Result<Self, GeometryError> {
        if h.d <= EPS_PLANE {
            return Err(GeometryError::DegeneratePlane);
        }
        Ok(Self { pi: h.d * h.n })
    }

    pub fn d(&self) -> f64 {
        self.pi.norm()
    }

    pub fn normal(&self) -> Vector3<f64> {
        self.pi / self.pi.norm()
    }

    pub fn to_hesse(&self) -> Result<HessePlane, GeometryError> {
        let d = self.pi.norm();
        if d <= EPS_PLANE {
            return Err(GeometryError::DegeneratePlane);
        }
        Ok(HessePlane { n: self.pi / d, d })
    }
}

pub fn cp_from_hesse(n: &Vector3<f64>, d: f64) -> Result<CpPlane, GeometryError> {
    CpPlane::from_hesse(&HessePlane { n: *n, d })
}

pub fn hesse_from_cp(pi: &Vector3<f64>) -> Result<HessePlane, GeometryError> {
    CpPlane { pi: *pi }.to_hesse()
}

impl HessePlane {
    pub fn new(n: Vector3<f64>, d: f64) -> Self {
        Self { n: n.normalize(), d }
    }

    pub fn from_angles(theta: f64, phi: f64, d: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self { n: Vector3::new(ct * cp, st * cp, sp), d }
    }

    /// Azimuth and elevation of the normal.
    pub fn angles(&self) -> Result<(f64, f64), GeometryError> {
        let rho2 = self.n.x * self.n.x + self.n.y * self.n.y;
        if rho2 <= 1e-12 {
            return Err(GeometryError::SingularElevation);
        }
        Ok((self.n.y.atan2(self.n.x), self.n.z.atan2(rho2.sqrt())))
    }

    /// `d n / d θ` divided by `cos φ`.
    pub fn perp1(&self) -> Result<Vector3<f64>, GeometryError> {
        let (t, _) = self.angles()?;
        Ok(Vector3::new(-t.sin(), t.cos(), 0.0))
    }

    /// `d n / d φ`.
    pub fn perp2(&self) -> Result<Vector3<f64>, GeometryError> {
        let (t, p) = self.angles()?;
        Ok(Vector3::new(-t.cos() * p.sin(), -t.sin() * p.sin(), p.cos()))
    }

    /// Additive update of `(θ, φ, d)`.
    pub fn boxplus(&self, dtheta: f64, dphi: f64, dd: f64) -> Result<Self, GeometryError> {
        let (t, p) = self.angles()?;
        Ok(Self::from_angles(t + dtheta, p + dphi, self.d + dd))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cp_examples() {
        let cp = cp_from_hesse(&Vector3::z(), 2.0).unwrap();
        assert_eq!(cp.pi, Vector3::new(0.0, 0.0, 2.0));
        assert_eq!(cp_from_hesse(&Vector3::z(), 0.0), Err(GeometryError::DegeneratePlane));
        assert_eq!(CpPlane::new(Vector3::zeros()), Err(GeometryError::DegeneratePlane));
    }

    #[test]
    fn cp_hesse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let n = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)).normalize();
            let d = rng.random_range(0.1..10.0);
            let cp = cp_from_hesse(&n, d).unwrap();
            let h = hesse_from_cp(&cp.pi).unwrap();
            assert!((h.n - n).norm() < 1e-12 && (h.d - d).abs() < 1e-12);
            assert!((h.n.norm() - 1.0).abs() < 1e-12);
            let (t, p) = h.angles().unwrap();
            assert!((HessePlane::from_angles(t, p, d).n - n).norm() < 1e-10);
        }
    }

    #[test]
    fn vertical_normal_is_singular() {
        let h = HessePlane::new(Vector3::z(), 1.0);
        assert_eq!(h.angles(), Err(GeometryError::SingularElevation));
    }
}
