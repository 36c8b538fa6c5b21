use ains_geometry::{CpPlane, HessePlane, PluckerLine, Pose, Quat};
use ains_propagation::{ImuState, TrajPoint, IMU_DIM};
use nalgebra::{DMatrix, DVector, SVector, SymmetricEigen, Vector3};

use crate::EstError;

/// Feature kept in the filter state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateFeature {
    Point(Vector3<f64>),
    Line(PluckerLine),
    CpPlane(CpPlane),
    HessePlane(HessePlane),
}

impl StateFeature {
    pub fn dim(&self) -> usize {
        match self {
            Self::Line(_) => 4,
            _ => 3,
        }
    }

    pub fn boxplus(&self, d: &[f64]) -> Result<Self, EstError> {
        let v = |i: usize| Vector3::new(d[i], d[i + 1], d[i + 2]);
        Ok(match self {
            Self::Point(p) => Self::Point(p + v(0)),
            Self::Line(l) => Self::Line(l.boxplus(&v(0), d[3])),
            Self::CpPlane(pl) => Self::CpPlane(CpPlane::new(pl.pi + v(0)).map_err(ains_measurement::MeasError::from)?),
            Self::HessePlane(h) => Self::HessePlane(h.boxplus(d[0], d[1], d[2]).map_err(ains_measurement::MeasError::from)?),
        })
    }
}

/// Stochastic copy of the IMU pose at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseClone {
    pub t: f64,
    pub q: Quat,
    pub p: Vector3<f64>,
}

impl PoseClone {
    pub fn pose(&self) -> Pose {
        Pose::new(self.q, self.p)
    }
}

/// IMU state, pose clones and features with their joint error covariance.
///
/// Error layout: 15 IMU states, then 6 per clone (`dθ`, `p`), then the
/// feature errors in order.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    pub t: f64,
    pub imu: ImuState,
    pub clones: Vec<PoseClone>,
    pub features: Vec<StateFeature>,
    pub cov: DMatrix<f64>,
}

/// Smallest eigenvalue tolerated after symmetrization.
pub const PSD_TOL: f64 = -1e-9;

impl HybridState {
    pub fn new(t: f64, imu: ImuState, features: Vec<StateFeature>, cov: DMatrix<f64>) -> Self {
        Self { t, imu, clones: Vec::new(), features, cov }
    }

    pub fn dim(&self) -> usize {
        self.feature_offset(self.features.len())
    }

    pub fn clone_offset(&self, i: usize) -> usize {
        IMU_DIM + 6 * i
    }

    pub fn feature_offset(&self, i: usize) -> usize {
        self.clone_offset(self.clones.len()) + self.features[..i].iter().map(|f| f.dim()).sum::<usize>()
    }

    /// Applies an error-state correction to every component.
    pub fn boxplus(&self, dx: &DVector<f64>) -> Result<Self, EstError> {
        let mut out = self.clone();
        out.imu = self.imu.boxplus(&SVector::<f64, IMU_DIM>::from_iterator(dx.rows(0, IMU_DIM).iter().copied()));
        for (i, c) in out.clones.iter_mut().enumerate() {
            let o = self.clone_offset(i);
            c.q = c.q.boxplus(&Vector3::new(dx[o], dx[o + 1], dx[o + 2]));
            c.p += Vector3::new(dx[o + 3], dx[o + 4], dx[o + 5]);
        }
        for i in 0..self.features.len() {
            let o = self.feature_offset(i);
            let d = self.features[i].dim();
            out.features[i] = self.features[i].boxplus(&dx.as_slice()[o..o + d])?;
        }
        Ok(out)
    }

    /// Symmetrizes the covariance and checks its smallest eigenvalue.
    pub fn symmetrize(&mut self) -> Result<(), EstError> {
        self.cov = 0.5 * (&self.cov + self.cov.transpose());
        let n = self.cov.nrows();
        let shifted = &self.cov + DMatrix::identity(n, n) * (-PSD_TOL);
        if shifted.cholesky().is_some() {
            return Ok(());
        }
        let min = SymmetricEigen::new(self.cov.clone()).eigenvalues.min();
        if min < PSD_TOL || min.is_nan() {
            return Err(EstError::CovarianceNotPSD(min));
        }
        Ok(())
    }
}

/// Ground truth used by the ideal filter: the true IMU trajectory on the
/// sample grid and the true features in filter order.
#[derive(Debug, Clone, Copy)]
pub struct Truth<'a> {
    pub traj: &'a [TrajPoint],
    pub features: &'a [StateFeature],
}

impl Truth<'_> {
    pub fn at(&self, t: f64) -> Result<&TrajPoint, EstError> {
        let i = self.traj.partition_point(|p| p.t < t - 1e-9);
        self.traj.get(i).filter(|p| (p.t - t).abs() <= 1e-9).ok_or(EstError::TruthMissing(t))
    }
}

/// Linearization point of propagation and update Jacobians.
#[derive(Debug, Clone, Copy)]
pub enum LinearizationMode<'a> {
    /// Current estimate.
    Standard,
    /// Ground truth.
    Ideal(Truth<'a>),
}
