use ains_propagation::{compute_phi, compute_qk, propagate_trajectory, ImuSample, NoiseParams, TrajPoint, IMU_DIM};
use nalgebra::{DMatrix, DVector};

use crate::model::predict;
use crate::{EstError, HybridState, LinearizationMode, Observation, SensorNoise};

/// Propagates the IMU mean through `samples` (first sample at `state.t`)
/// and the covariance with `Φ`, `Q` linearized per `mode`.
pub fn ekf_propagate(
    state: &HybridState,
    samples: &[ImuSample],
    noise: &NoiseParams,
    mode: &LinearizationMode,
) -> Result<HybridState, EstError> {
    let est: Vec<TrajPoint> = propagate_trajectory(&state.imu, samples)?;
    let (t0, t1) = (samples[0].t, samples[samples.len() - 1].t);
    let lin: &[TrajPoint] = match mode {
        LinearizationMode::Standard => &est,
        LinearizationMode::Ideal(truth) => truth.traj,
    };
    let phi = compute_phi(lin, t0, t1, 0)?.phi;
    let q = compute_qk(lin, t0, t1, noise)?;
    let mut out = state.clone();
    out.t = t1;
    out.imu = est[est.len() - 1].state;
    let n = state.dim();
    let rest = n - IMU_DIM;
    let p = &state.cov;
    let pii = &phi * p.view((0, 0), (IMU_DIM, IMU_DIM)) * phi.transpose() + q;
    out.cov.view_mut((0, 0), (IMU_DIM, IMU_DIM)).copy_from(&pii);
    if rest > 0 {
        let pix = &phi * p.view((0, IMU_DIM), (IMU_DIM, rest));
        out.cov.view_mut((0, IMU_DIM), (IMU_DIM, rest)).copy_from(&pix);
        out.cov.view_mut((IMU_DIM, 0), (rest, IMU_DIM)).copy_from(&pix.transpose());
    }
    out.symmetrize()?;
    Ok(out)
}

/// Joseph-form Kalman update with stacked Jacobian `h`, residual `r` and
/// per-row noise standard deviations `sigma`.
pub fn kalman_update(state: &HybridState, h: &DMatrix<f64>, r: &DVector<f64>, sigma: &DVector<f64>) -> Result<HybridState, EstError> {
    kalman_update_cov(state, h, r, &DMatrix::from_diagonal(&sigma.map(|s| s * s)))
}

/// [`kalman_update`] with a full measurement noise covariance `rn`.
pub(crate) fn kalman_update_cov(
    state: &HybridState,
    h: &DMatrix<f64>,
    r: &DVector<f64>,
    rn: &DMatrix<f64>,
) -> Result<HybridState, EstError> {
    let n = state.dim();
    let ph = &state.cov * h.transpose();
    let s = h * &ph + rn;
    let chol = s.cholesky().ok_or(EstError::SingularInnovation)?;
    let k = chol.solve(&ph.transpose()).transpose();
    let dx = &k * r;
    let mut out = state.boxplus(&dx)?;
    let ikh = DMatrix::identity(n, n) - &k * h;
    out.cov = &ikh * &state.cov * ikh.transpose() + &k * rn * k.transpose();
    out.symmetrize()?;
    Ok(out)
}

/// EKF update with observations of in-state features, `(feature index,
/// observation)` pairs.
pub fn ekf_update(
    state: &HybridState,
    observations: &[(usize, Observation)],
    noise: &SensorNoise,
    mode: &LinearizationMode,
) -> Result<HybridState, EstError> {
    if observations.is_empty() {
        return Ok(state.clone());
    }
    let pose_est = state.imu.pose();
    let pose_lin = match mode {
        LinearizationMode::Standard => pose_est,
        LinearizationMode::Ideal(truth) => truth.at(state.t)?.state.pose(),
    };
    let n = state.dim();
    let mut hs = Vec::new();
    let mut rs = Vec::new();
    let mut ss = Vec::new();
    for (id, obs) in observations {
        let f = state.features.get(*id).ok_or(EstError::UnknownIndex(*id))?;
        let f_lin = match mode {
            LinearizationMode::Standard => f,
            LinearizationMode::Ideal(truth) => truth.features.get(*id).ok_or(EstError::UnknownIndex(*id))?,
        };
        let (r, j, s) = predict(obs, &pose_est, f, &pose_lin, f_lin, noise)?;
        hs.push(j.embed(n, Some(state.feature_offset(*id))));
        rs.extend(r.iter().copied());
        ss.extend(s.iter().copied());
    }
    let rows: usize = hs.iter().map(|h| h.nrows()).sum();
    let mut h = DMatrix::zeros(rows, n);
    let mut at = 0;
    for b in hs {
        h.rows_mut(at, b.nrows()).copy_from(&b);
        at += b.nrows();
    }
    kalman_update(state, &h, &DVector::from_vec(rs), &DVector::from_vec(ss))
}
