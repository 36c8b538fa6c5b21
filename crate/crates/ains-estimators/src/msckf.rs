use ains_geometry::Pose;
use ains_measurement::{point_projection_jacobian, PointSensorModel};
use ains_propagation::IMU_DIM;
use nalgebra::{DMatrix, DVector, Matrix3, Vector2, Vector3};

use crate::ekf::kalman_update_cov;
use crate::model::predict;
use crate::{EstError, HybridState, LinearizationMode, Observation, PoseClone, SensorNoise, StateFeature};

/// Sliding-window length.
pub const DEFAULT_WINDOW: usize = 10;
/// Fewest clones observing a feature before it is used.
pub const MIN_TRACK: usize = 3;

/// Observation of a marginalized feature from clone `clone`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackObs {
    pub clone: usize,
    pub obs: Observation,
}

/// Appends a clone of the current IMU pose; drops the oldest clone when
/// the window holds more than `window` clones.
pub fn msckf_augment(state: &HybridState, window: usize) -> Result<HybridState, EstError> {
    let n = state.dim();
    let at = state.clone_offset(state.clones.len());
    let mut t = DMatrix::zeros(n + 6, n);
    for i in 0..n {
        t[(if i < at { i } else { i + 6 }, i)] = 1.0;
    }
    for k in 0..3 {
        t[(at + k, k)] = 1.0;
        t[(at + 3 + k, 12 + k)] = 1.0;
    }
    let mut out = state.clone();
    out.clones.push(PoseClone { t: state.t, q: state.imu.q, p: state.imu.p });
    out.cov = &t * &state.cov * t.transpose();
    if out.clones.len() > window {
        out.clones.remove(0);
        let keep: Vec<usize> = (0..n + 6).filter(|&i| !(IMU_DIM..IMU_DIM + 6).contains(&i)).collect();
        out.cov = out.cov.select_rows(&keep).select_columns(&keep);
    }
    out.symmetrize()?;
    Ok(out)
}

/// Orthonormal rows spanning the left null space of `h_f`.
pub fn left_annihilator(h_f: &DMatrix<f64>) -> Result<DMatrix<f64>, EstError> {
    let (m, d) = h_f.shape();
    if m <= d {
        return Err(EstError::RankDeficientHf);
    }
    let mut aug = DMatrix::zeros(m, d + m);
    aug.columns_mut(0, d).copy_from(h_f);
    aug.columns_mut(d, m).fill_with_identity();
    let qr = aug.qr();
    let r = qr.r();
    let diag_max = (0..d).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let floor = 1e-9 * diag_max.max(h_f.norm());
    if (0..d).any(|i| r[(i, i)].is_nan() || r[(i, i)].abs() <= floor) {
        return Err(EstError::RankDeficientHf);
    }
    Ok(qr.q().columns(d, m - d).transpose())
}

/// EKF update with the system `A r = A H_x dx + A n` for annihilator `a`.
pub fn projected_update(
    state: &HybridState,
    h_x: &DMatrix<f64>,
    r: &DVector<f64>,
    sigma: &DVector<f64>,
    a: &DMatrix<f64>,
) -> Result<HybridState, EstError> {
    let rn = a * DMatrix::from_diagonal(&sigma.map(|s| s * s)) * a.transpose();
    kalman_update_cov(state, &(a * h_x), &(a * r), &rn)
}

/// Clone Jacobian, feature Jacobian, residual and noise of a stacked track.
pub(crate) type StackedTrack = (DMatrix<f64>, DMatrix<f64>, DVector<f64>, DVector<f64>);

/// Stacks every observation of one track.
pub(crate) fn stack_track(
    state: &HybridState,
    id: usize,
    track: &[TrackObs],
    feat_est: &StateFeature,
    noise: &SensorNoise,
    mode: &LinearizationMode,
) -> Result<StackedTrack, EstError> {
    if track.len() < MIN_TRACK {
        return Err(EstError::TrackTooShort(track.len()));
    }
    let n = state.dim();
    let f_lin = match mode {
        LinearizationMode::Standard => *feat_est,
        LinearizationMode::Ideal(truth) => *truth.features.get(id).ok_or(EstError::UnknownIndex(id))?,
    };
    let mut blocks = Vec::new();
    for o in track {
        let c = state.clones.get(o.clone).ok_or(EstError::UnknownIndex(o.clone))?;
        let pose_lin = match mode {
            LinearizationMode::Standard => c.pose(),
            LinearizationMode::Ideal(truth) => truth.at(c.t)?.state.pose(),
        };
        let (r, j, s) = predict(&o.obs, &c.pose(), feat_est, &pose_lin, &f_lin, noise)?;
        let off = state.clone_offset(o.clone);
        blocks.push((j.embed_at(n, off, off + 3, None), j.h_f, r, s));
    }
    let rows: usize = blocks.iter().map(|b| b.0.nrows()).sum();
    let d = feat_est.dim();
    let (mut hx, mut hf) = (DMatrix::zeros(rows, n), DMatrix::zeros(rows, d));
    let (mut r, mut s) = (DVector::zeros(rows), DVector::zeros(rows));
    let mut at = 0;
    for (bx, bf, br, bs) in blocks {
        let k = bx.nrows();
        hx.rows_mut(at, k).copy_from(&bx);
        hf.rows_mut(at, k).copy_from(&bf);
        r.rows_mut(at, k).copy_from(&br);
        s.rows_mut(at, k).copy_from(&bs);
        at += k;
    }
    Ok((hx, hf, r, s))
}

/// Uses all observations of one feature across the window and
/// marginalizes the feature with the left annihilator of its Jacobian.
pub fn msckf_update_track(
    state: &HybridState,
    id: usize,
    track: &[TrackObs],
    feat_est: &StateFeature,
    noise: &SensorNoise,
    mode: &LinearizationMode,
) -> Result<HybridState, EstError> {
    let (hx, hf, r, s) = stack_track(state, id, track, feat_est, noise, mode)?;
    let a = left_annihilator(&hf)?;
    projected_update(state, &hx, &r, &s, &a)
}

/// Multi-view point from normalized bearings: linear least squares on the
/// rays followed by Gauss-Newton on the image residuals.
pub fn triangulate_point(poses: &[Pose], bearings: &[Vector2<f64>]) -> Option<Vector3<f64>> {
    if poses.len() < 2 || poses.len() != bearings.len() {
        return None;
    }
    let mut a = Matrix3::zeros();
    let mut b = Vector3::zeros();
    for (ps, z) in poses.iter().zip(bearings) {
        let d = (ps.rot().transpose() * Vector3::new(z.x, z.y, 1.0)).normalize();
        let m = Matrix3::identity() - d * d.transpose();
        a += m;
        b += m * ps.p;
    }
    if a.symmetric_eigenvalues().min() < 1e-8 * a.trace() {
        return None;
    }
    let mut p = a.lu().solve(&b)?;
    for _ in 0..10 {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (ps, z) in poses.iter().zip(bearings) {
            let l = ps.rot() * (p - ps.p);
            if l.z <= 1e-6 {
                return None;
            }
            let hp = point_projection_jacobian(&PointSensorModel::MonoBearing, &l).ok()?;
            let j = nalgebra::Matrix2x3::from_iterator(hp.iter().copied()) * ps.rot();
            let res = z - Vector2::new(l.x / l.z, l.y / l.z);
            jtj += j.transpose() * j;
            jtr += j.transpose() * res;
        }
        let step = jtj.lu().solve(&jtr)?;
        p += step;
        if step.norm() < 1e-12 * (1.0 + p.norm()) {
            break;
        }
    }
    Some(p)
}

/// One marginalized feature: its index, observations and current estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: usize,
    pub obs: Vec<TrackObs>,
    pub feat: StateFeature,
}

/// Single stacked update with every track whose feature Jacobian has full
/// column rank; returns the updated state and the number of tracks used.
pub fn msckf_update_tracks(
    state: &HybridState,
    tracks: &[Track],
    noise: &SensorNoise,
    mode: &LinearizationMode,
) -> Result<(HybridState, usize), EstError> {
    let n = state.dim();
    let mut parts = Vec::new();
    for t in tracks {
        let (hx, hf, r, s) = stack_track(state, t.id, &t.obs, &t.feat, noise, mode)?;
        let a = match left_annihilator(&hf) {
            Ok(a) => a,
            Err(EstError::RankDeficientHf) => continue,
            Err(e) => return Err(e),
        };
        let rn = &a * DMatrix::from_diagonal(&s.map(|x| x * x)) * a.transpose();
        parts.push((&a * hx, &a * r, rn));
    }
    if parts.is_empty() {
        return Ok((state.clone(), 0));
    }
    let m: usize = parts.iter().map(|p| p.1.len()).sum();
    let (mut h, mut r, mut rn) = (DMatrix::zeros(m, n), DVector::zeros(m), DMatrix::zeros(m, m));
    let mut at = 0;
    for (ph, pr, pn) in &parts {
        let k = pr.len();
        h.rows_mut(at, k).copy_from(ph);
        r.rows_mut(at, k).copy_from(pr);
        rn.view_mut((at, at), (k, k)).copy_from(pn);
        at += k;
    }
    Ok((kalman_update_cov(state, &h, &r, &rn)?, parts.len()))
}
