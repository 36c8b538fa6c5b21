use ains_geometry::skew;
use nalgebra::{DMatrix, Matrix3};

use crate::{gravity, NoiseParams, PropagationError, TrajPoint, IMU_DIM};

/// Discrete error-state transition `Φ(k, 1)` over `15 + m` states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTransition {
    pub phi: DMatrix<f64>,
}

impl StateTransition {
    pub fn identity(m_feat: usize) -> Self {
        Self { phi: DMatrix::identity(IMU_DIM + m_feat, IMU_DIM + m_feat) }
    }

    /// 3x3 block `(i, j)`, 1-based over the five IMU sub-blocks.
    pub fn block(&self, i: usize, j: usize) -> Matrix3<f64> {
        self.phi.fixed_view::<3, 3>(3 * (i - 1), 3 * (j - 1)).into_owned()
    }

    fn set(&mut self, i: usize, j: usize, m: &Matrix3<f64>) {
        self.phi.fixed_view_mut::<3, 3>(3 * (i - 1), 3 * (j - 1)).copy_from(m);
    }

    /// The upper-left 15x15 IMU part.
    pub fn imu(&self) -> DMatrix<f64> {
        self.phi.view((0, 0), (IMU_DIM, IMU_DIM)).into_owned()
    }
}

const TIME_TOL: f64 = 1e-9;

fn locate(traj: &[TrajPoint], t: f64) -> Option<usize> {
    let i = traj.partition_point(|p| p.t < t - TIME_TOL);
    (i < traj.len() && (traj[i].t - t).abs() <= TIME_TOL).then_some(i)
}

fn index_range(traj: &[TrajPoint], t1: f64, tk: f64) -> Result<(usize, usize), PropagationError> {
    match (locate(traj, t1), locate(traj, tk)) {
        (Some(a), Some(b)) if a <= b => Ok((a, b)),
        _ => Err(PropagationError::IntervalNotCovered(t1, tk)),
    }
}

fn trapz_step(acc: &Matrix3<f64>, f0: &Matrix3<f64>, f1: &Matrix3<f64>, h: f64) -> Matrix3<f64> {
    acc + 0.5 * h * (f0 + f1)
}

/// `Φ(tk, t1)` along a stored trajectory.
///
/// `Φ11`, `Φ31`, `Φ51` use closed forms in the end-point states; the
/// bias-coupling blocks are trapezoidal quadratures on the sample grid.
/// `t1` and `tk` must coincide with grid times.
pub fn compute_phi(traj: &[TrajPoint], t1: f64, tk: f64, m_feat: usize) -> Result<StateTransition, PropagationError> {
    let (i1, ik) = index_range(traj, t1, tk)?;
    Ok(phi_indices(traj, i1, ik, m_feat))
}

pub(crate) fn phi_indices(traj: &[TrajPoint], i1: usize, ik: usize, m_feat: usize) -> StateTransition {
    let mut st = StateTransition::identity(m_feat);
    if i1 == ik {
        return st;
    }
    let g = gravity();
    let s1 = &traj[i1].state;
    let sk = &traj[ik].state;
    let r1 = s1.q.rot();
    let rk = sk.q.rot();
    let dt = traj[ik].t - traj[i1].t;

    // a = ∫ R^T, b = ∫ [c]x a (c global specific force), ia = ∫ a, ib = ∫ b
    let mut a = Matrix3::zeros();
    let mut b = Matrix3::zeros();
    let mut ia = Matrix3::zeros();
    let mut ib = Matrix3::zeros();
    let mut rt_prev = r1.transpose();
    let mut ca_prev = Matrix3::zeros();
    for i in i1..ik {
        let h = traj[i + 1].t - traj[i].t;
        let s = &traj[i + 1].state;
        let rt = s.q.rot().transpose();
        let a_new = trapz_step(&a, &rt_prev, &rt, h);
        let c = rt * (traj[i + 1].sample.accel - s.ba);
        let ca = skew(&c) * a_new;
        let b_new = trapz_step(&b, &ca_prev, &ca, h);
        ia = trapz_step(&ia, &a, &a_new, h);
        ib = trapz_step(&ib, &b, &b_new, h);
        a = a_new;
        b = b_new;
        rt_prev = rt;
        ca_prev = ca;
    }

    st.set(1, 1, &(rk * r1.transpose()));
    st.set(1, 2, &(-rk * a));
    st.set(3, 1, &(-skew(&(sk.v - s1.v - g * dt)) * r1.transpose()));
    st.set(3, 2, &b);
    st.set(3, 4, &(-a));
    st.set(5, 1, &(skew(&(s1.p + s1.v * dt + 0.5 * g * dt * dt - sk.p)) * r1.transpose()));
    st.set(5, 2, &ib);
    st.set(5, 3, &(Matrix3::identity() * dt));
    st.set(5, 4, &(-ia));
    st
}

/// Discrete noise covariance over `[tk, tk1]` (15x15), trapezoidal
/// quadrature of `Φ(tk1, τ) G Qc G^T Φ(tk1, τ)^T`.
pub fn compute_qk(traj: &[TrajPoint], tk: f64, tk1: f64, noise: &NoiseParams) -> Result<DMatrix<f64>, PropagationError> {
    let (i0, i1) = index_range(traj, tk, tk1)?;
    let mut q = DMatrix::zeros(IMU_DIM, IMU_DIM);
    if i0 == i1 {
        return Ok(q);
    }
    let integrand = |j: usize| -> DMatrix<f64> {
        let phi = phi_indices(traj, j, i1, 0).phi;
        let rt = traj[j].state.q.rot().transpose();
        let mut gq = DMatrix::zeros(IMU_DIM, 12);
        // columns: n_g, n_wg, n_a, n_wa scaled by their densities
        for (blk, sig, m, row) in [
            (0, noise.sigma_g, -Matrix3::identity(), 0),
            (1, noise.sigma_wg, Matrix3::identity(), 1),
            (2, noise.sigma_a, -rt, 2),
            (3, noise.sigma_wa, Matrix3::identity(), 3),
        ] {
            gq.fixed_view_mut::<3, 3>(3 * row, 3 * blk).copy_from(&(sig * m));
        }
        let pg = phi * gq;
        &pg * pg.transpose()
    };
    let mut prev = integrand(i0);
    for j in i0..i1 {
        let h = traj[j + 1].t - traj[j].t;
        let next = integrand(j + 1);
        q += 0.5 * h * (&prev + &next);
        prev = next;
    }
    Ok(0.5 * (&q + q.transpose()))
}
