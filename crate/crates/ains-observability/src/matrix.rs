use ains_geometry::{CpPlane, HessePlane, PluckerLine, PointEuclidean, PointSpherical, Pose};
use ains_measurement::{
    global_measure_and_jacobian, line_direct_measure_and_jacobian, line_jacobian, line_transform_to_local, plane_jacobian_cp,
    plane_jacobian_hesse, point_jacobian, point_jacobian_spherical, FeatureJacobian, GlobalMeasModel, Intrinsics, LineObservation,
    PointSensorModel,
};
use ains_propagation::{compute_phi, TrajPoint, IMU_DIM};
use nalgebra::{DMatrix, Vector3};

use crate::ObsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineModel {
    /// Image line through the projection matrix `K`.
    Projective(Intrinsics),
    /// 3D line extracted from a point cloud.
    Direct,
}

/// A feature in the state together with the sensor that observes it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObsFeature {
    Point { p: Vector3<f64>, model: PointSensorModel },
    SphericalPoint { s: PointSpherical, model: PointSensorModel },
    Line { l: PluckerLine, model: LineModel },
    CpPlane(CpPlane),
    HessePlane(HessePlane),
}

impl ObsFeature {
    pub fn dim(&self) -> usize {
        match self {
            Self::Line { .. } => 4,
            _ => 3,
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, Self::Point { .. } | Self::SphericalPoint { .. })
    }

    pub fn is_line(&self) -> bool {
        matches!(self, Self::Line { .. })
    }

    pub fn is_plane(&self) -> bool {
        matches!(self, Self::CpPlane(_) | Self::HessePlane(_))
    }

    /// Measurement Jacobian at the true pose.
    pub fn jacobian(&self, pose: &Pose) -> Result<FeatureJacobian, ObsError> {
        Ok(match self {
            Self::Point { p, model } => point_jacobian(model, pose, &PointEuclidean::new(*p))?,
            Self::SphericalPoint { s, model } => point_jacobian_spherical(model, pose, s)?,
            Self::Line { l, model: LineModel::Projective(intr) } => {
                let obs = exact_line_observation(pose, l, intr);
                line_jacobian(pose, l, intr, &obs)?
            }
            Self::Line { l, model: LineModel::Direct } => {
                let v_m = (pose.rot() * l.v).normalize();
                line_direct_measure_and_jacobian(pose, l, &v_m)?.1
            }
            Self::CpPlane(pl) => plane_jacobian_cp(pose, pl)?,
            Self::HessePlane(pl) => plane_jacobian_hesse(pose, pl)?,
        })
    }
}

/// Two pixels on the noise-free image of `l`, spaced one focal length
/// either side of the foot of the perpendicular from the pixel origin.
fn exact_line_observation(pose: &Pose, l: &PluckerLine, intr: &Intrinsics) -> LineObservation {
    let lp = intr.k_line() * line_transform_to_local(pose, l).n;
    let s2 = lp.x * lp.x + lp.y * lp.y;
    let foot = Vector3::new(-lp.x * lp.z / s2, -lp.y * lp.z / s2, 1.0);
    let dir = Vector3::new(-lp.y, lp.x, 0.0) / s2.sqrt() * intr.f1;
    LineObservation { xs: foot - dir, xe: foot + dir }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSource {
    Feature(usize),
    Global(usize),
}

/// Origin of one row of `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowTag {
    pub epoch: usize,
    pub source: RowSource,
}

/// Stacked `H_k Φ(k, 1)` over all epochs.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservabilityMatrix {
    pub m: DMatrix<f64>,
    pub rows: Vec<RowTag>,
    /// Row ranges of each epoch's block.
    pub blocks: Vec<std::ops::Range<usize>>,
}

impl ObservabilityMatrix {
    pub fn cols(&self) -> usize {
        self.m.ncols()
    }

    /// Rows of the first `k` epochs.
    pub fn first_epochs(&self, k: usize) -> DMatrix<f64> {
        let end = self.blocks[..k].last().map_or(0, |r| r.end);
        self.m.rows(0, end).into_owned()
    }
}

/// Error-state column where each feature starts.
pub fn feature_offsets(features: &[ObsFeature]) -> Vec<usize> {
    features
        .iter()
        .scan(IMU_DIM, |c, f| {
            let at = *c;
            *c += f.dim();
            Some(at)
        })
        .collect()
}

/// Builds `M = [H_1 Φ(1,1); ...; H_K Φ(K,1)]` with Jacobians and transition
/// matrices linearized on the true trajectory. `epochs` index into `traj`;
/// the first one is the reference time.
pub fn build_observability_matrix(
    traj: &[TrajPoint],
    epochs: &[usize],
    features: &[ObsFeature],
    globals: &[GlobalMeasModel],
) -> Result<ObservabilityMatrix, ObsError> {
    if epochs.len() < 2 {
        return Err(ObsError::TooFewEpochs(epochs.len()));
    }
    let offsets = feature_offsets(features);
    let n = IMU_DIM + features.iter().map(|f| f.dim()).sum::<usize>();
    let t1 = traj[epochs[0]].t;
    let mut blocks_m: Vec<DMatrix<f64>> = Vec::new();
    let mut rows = Vec::new();
    let mut blocks = Vec::new();
    let mut total = 0;
    for (k, &i) in epochs.iter().enumerate() {
        let phi = compute_phi(traj, t1, traj[i].t, 0)?.phi;
        let pose = traj[i].state.pose();
        let start = total;
        let mut push = |j: &FeatureJacobian, col: Option<usize>, source: RowSource| {
            let h = j.embed(n, col);
            let mut b = h.clone();
            b.columns_mut(0, IMU_DIM).copy_from(&(h.columns(0, IMU_DIM) * &phi));
            total += b.nrows();
            rows.extend(std::iter::repeat_n(RowTag { epoch: k, source }, b.nrows()));
            blocks_m.push(b);
        };
        for (fi, f) in features.iter().enumerate() {
            push(&f.jacobian(&pose)?, Some(offsets[fi]), RowSource::Feature(fi));
        }
        for (gi, g) in globals.iter().enumerate() {
            push(&global_measure_and_jacobian(g, &pose).1, None, RowSource::Global(gi));
        }
        blocks.push(start..total);
    }
    let mut m = DMatrix::zeros(total, n);
    let mut r = 0;
    for b in blocks_m {
        m.rows_mut(r, b.nrows()).copy_from(&b);
        r += b.nrows();
    }
    Ok(ObservabilityMatrix { m, rows, blocks })
}
