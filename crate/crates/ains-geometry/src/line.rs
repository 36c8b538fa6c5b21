use nalgebra::{Matrix2, Matrix3, SMatrix, Vector3};

use crate::rotation::{exp_so3, skew};
use crate::GeometryError;

const LINE_TOL: f64 = 1e-9;

/// Plücker line: normal `n = p1 x p2` and direction `v = p2 - p1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PluckerLine {
    pub n: Vector3<f64>,
    pub v: Vector3<f64>,
}

/// Orthonormal form of a Plücker line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineOrthonormal {
    pub r_l: Matrix3<f64>,
    pub w_l: Matrix2<f64>,
    pub w1: f64,
    pub w2: f64,
    pub eta: f64,
}

impl PluckerLine {
    pub fn new(n: Vector3<f64>, v: Vector3<f64>) -> Result<Self, GeometryError> {
        if n.norm() < LINE_TOL || v.norm() < LINE_TOL {
            return Err(GeometryError::DegenerateLine);
        }
        Ok(Self { n, v })
    }

    pub fn from_endpoints(p1: &Vector3<f64>, p2: &Vector3<f64>) -> Result<Self, GeometryError> {
        Self::new(p1.cross(p2), p2 - p1)
    }

    pub fn orthonormal(&self) -> LineOrthonormal {
        let w1 = self.n.norm();
        let w2 = self.v.norm();
        let c = self.n.cross(&self.v);
        let r_l = Matrix3::from_columns(&[self.n / w1, self.v / w2, c / c.norm()]);
        let eta = 1.0 / (w1 * w1 + w2 * w2).sqrt();
        let w_l = eta * Matrix2::new(w1, -w2, w2, w1);
        LineOrthonormal { r_l, w_l, w1, w2, eta }
    }

    pub fn n_unit(&self) -> Vector3<f64> {
        self.n.normalize()
    }

    pub fn v_unit(&self) -> Vector3<f64> {
        self.v.normalize()
    }

    /// Distance from the origin to the line.
    pub fn distance(&self) -> f64 {
        self.n.norm() / self.v.norm()
    }

    /// Closest point of the line to the origin.
    pub fn closest_point(&self) -> Vector3<f64> {
        self.v.cross(&self.n) / self.v.norm_squared()
    }

    /// Perturbs the orthonormal parameters:
    /// `R_L <- exp(-[dθ]x) R_L`, `φ <- φ + dφ`, keeping `sqrt(w1² + w2²)`.
    pub fn boxplus(&self, dtheta: &Vector3<f64>, dphi: f64) -> PluckerLine {
        if *dtheta == Vector3::zeros() && dphi == 0.0 {
            return *self;
        }
        let o = self.orthonormal();
        let r = exp_so3(&(-dtheta)) * o.r_l;
        let s = 1.0 / o.eta;
        let phi = o.w2.atan2(o.w1) + dphi;
        PluckerLine { n: s * phi.cos() * r.column(0).into_owned(), v: s * phi.sin() * r.column(1).into_owned() }
    }

    /// First-order `d(n, v) / d(dθ, dφ)` of [`Self::boxplus`].
    pub fn perturbation_jacobian(&self) -> SMatrix<f64, 6, 4> {
        let w1 = self.n.norm();
        let w2 = self.v.norm();
        let mut j = SMatrix::<f64, 6, 4>::zeros();
        j.fixed_view_mut::<3, 3>(0, 0).copy_from(&skew(&self.n));
        j.fixed_view_mut::<3, 3>(3, 0).copy_from(&skew(&self.v));
        j.fixed_view_mut::<3, 1>(0, 3).copy_from(&(-(w2 / w1) * self.n));
        j.fixed_view_mut::<3, 1>(3, 3).copy_from(&((w1 / w2) * self.v));
        j
    }
}

impl LineOrthonormal {
    pub fn phi(&self) -> f64 {
        self.w2.atan2(self.w1)
    }

    pub fn to_plucker(&self) -> PluckerLine {
        PluckerLine { n: self.w1 * self.r_l.column(0).into_owned(), v: self.w2 * self.r_l.column(1).into_owned() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rvec(rng: &mut ChaCha8Rng, s: f64) -> Vector3<f64> {
        Vector3::new(rng.random_range(-s..s), rng.random_range(-s..s), rng.random_range(-s..s))
    }

    fn random_line(rng: &mut ChaCha8Rng) -> PluckerLine {
        loop {
            if let Ok(l) = PluckerLine::from_endpoints(&rvec(rng, 5.0), &rvec(rng, 5.0)) {
                if l.n.norm() > 0.1 && l.v.norm() > 0.1 {
                    return l;
                }
            }
        }
    }

    #[test]
    fn endpoints_examples() {
        let l = PluckerLine::from_endpoints(&Vector3::new(1.0, 0.0, 0.0), &Vector3::new(1.0, 1.0, 0.0)).unwrap();
        assert_eq!((l.n, l.v), (Vector3::z(), Vector3::y()));
        let l = PluckerLine::from_endpoints(&Vector3::new(0.0, 0.0, 1.0), &Vector3::new(1.0, 0.0, 1.0)).unwrap();
        assert_eq!((l.n, l.v), (Vector3::y(), Vector3::x()));
        let e = PluckerLine::from_endpoints(&Vector3::zeros(), &Vector3::x());
        assert_eq!(e, Err(GeometryError::DegenerateLine));
    }

    #[test]
    fn orthonormal_examples() {
        let o = PluckerLine::new(Vector3::z(), Vector3::y()).unwrap().orthonormal();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!((o.w1, o.w2), (1.0, 1.0));
        assert!((o.w_l - Matrix2::new(s, -s, s, s)).norm() < 1e-15);
        let expect = Matrix3::from_columns(&[Vector3::z(), Vector3::y(), -Vector3::x()]);
        assert!((o.r_l - expect).norm() < 1e-15);
        let o = PluckerLine::new(Vector3::new(0.0, 0.0, 2.0), Vector3::y()).unwrap().orthonormal();
        assert_eq!((o.w1, o.w2), (2.0, 1.0));
        assert!((o.eta - 1.0 / 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_invariants_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let l = random_line(&mut rng);
            assert!(l.n.dot(&l.v).abs() < 1e-10);
            let o = l.orthonormal();
            assert!((o.r_l * o.r_l.transpose() - Matrix3::identity()).norm() < 1e-10);
            assert!((o.r_l.determinant() - 1.0).abs() < 1e-10);
            assert!((o.w_l * o.w_l.transpose() - Matrix2::identity()).norm() < 1e-10);
            assert!((o.w_l.determinant() - 1.0).abs() < 1e-10);
            let back = o.to_plucker();
            assert!((back.n - l.n).norm() < 1e-10 * l.n.norm() && (back.v - l.v).norm() < 1e-10 * l.v.norm());
        }
    }

    #[test]
    fn boxplus_identity_and_constraint() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..200 {
            let l = random_line(&mut rng);
            assert_eq!(l.boxplus(&Vector3::zeros(), 0.0), l);
            let m = l.boxplus(&rvec(&mut rng, 0.1), rng.random_range(-0.1..0.1));
            assert!(m.n.dot(&m.v).abs() < 1e-9 * m.n.norm() * m.v.norm());
        }
    }

    #[test]
    fn boxplus_matches_perturbation_jacobian() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let h = 1e-6;
        for _ in 0..100 {
            let l = random_line(&mut rng);
            let j = l.perturbation_jacobian();
            for k in 0..4 {
                let mut d = [0.0; 4];
                d[k] = h;
                let dp = Vector3::new(d[0], d[1], d[2]);
                let a = l.boxplus(&dp, d[3]);
                let b = l.boxplus(&-dp, -d[3]);
                let fd_n = (a.n - b.n) / (2.0 * h);
                let fd_v = (a.v - b.v) / (2.0 * h);
                let col = j.column(k);
                let err = (fd_n - col.fixed_rows::<3>(0)).norm() + (fd_v - col.fixed_rows::<3>(3)).norm();
                assert!(err < 1e-6 * (1.0 + col.norm()), "col {k} err {err}");
            }
        }
    }
}
