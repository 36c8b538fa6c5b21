//! Self-checks of the transition matrix and the mean integrator on a
//! smooth analytic motion.

use ains_geometry::Quat;
use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::{compute_phi, gravity, propagate_mean, ImuSample, ImuState, PropagationError, TrajPoint};

fn rx(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

fn ry(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

fn rz(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// State and exact IMU reading at `t`; `rot` and `trans` switch the
/// attitude and position excitation on.
pub fn test_motion(t: f64, rot: bool, trans: bool) -> (ImuState, ImuSample) {
    let k = if rot { 1.0 } else { 0.0 };
    let (psi, dpsi) = (k * 0.4 * (0.5 * t).sin(), k * 0.2 * (0.5 * t).cos());
    let (th, dth) = (k * 0.2 * (0.7 * t + 0.3).sin(), k * 0.14 * (0.7 * t + 0.3).cos());
    let (ph, dph) = (k * 0.3 * (0.9 * t).sin(), k * 0.27 * (0.9 * t).cos());
    let r_gi = rz(psi) * ry(th) * rx(ph);
    let omega =
        rx(ph).transpose() * ry(th).transpose() * Vector3::z() * dpsi + rx(ph).transpose() * Vector3::y() * dth + Vector3::x() * dph;
    let m = if trans { 1.0 } else { 0.0 };
    let p = m * Vector3::new((0.8 * t).sin(), 0.5 * (1.1 * t).cos(), 0.3 * (1.3 * t).sin());
    let v = m * Vector3::new(0.8 * (0.8 * t).cos(), -0.55 * (1.1 * t).sin(), 0.39 * (1.3 * t).cos());
    let acc = m * Vector3::new(-0.64 * (0.8 * t).sin(), -0.605 * (1.1 * t).cos(), -0.507 * (1.3 * t).sin());
    let ba = Vector3::new(0.02, -0.01, 0.03);
    let bg = Vector3::new(0.001, 0.002, -0.001);
    let state = ImuState { q: Quat::from_rot(&r_gi.transpose()), bg, v, ba, p };
    let accel = r_gi.transpose() * (acc - gravity()) + ba;
    (state, ImuSample { t, omega: omega + bg, accel })
}

/// [`test_motion`] sampled at `rate` Hz over `[0, dur]`.
pub fn test_trajectory(rate: f64, dur: f64, rot: bool, trans: bool) -> Vec<TrajPoint> {
    let n = (rate * dur).round() as usize;
    (0..=n)
        .map(|i| {
            let t = i as f64 / rate;
            let (state, sample) = test_motion(t, rot, trans);
            TrajPoint { t, state, sample }
        })
        .collect()
}

/// `|Φ54 - (-½ R1ᵀ Δt²)|_F` over 3 s of pure translation.
pub fn phi54_translation_error() -> Result<f64, PropagationError> {
    let tr = test_trajectory(200.0, 3.0, false, true);
    let st = compute_phi(&tr, 0.0, 3.0, 0)?;
    let expect = -0.5 * tr[0].state.q.rot().transpose() * 9.0;
    Ok((st.block(5, 4) - expect).norm())
}

/// Worst relative error of `Φ(k, j) Φ(j, 1)` against `Φ(k, 1)`.
pub fn semigroup_error() -> Result<f64, PropagationError> {
    let tr = test_trajectory(200.0, 4.0, true, true);
    let mut worst: f64 = 0.0;
    for (j, k) in [(1.0, 2.5), (2.0, 4.0), (0.05, 3.0)] {
        let full = compute_phi(&tr, 0.0, k, 2)?.phi;
        let comp = compute_phi(&tr, j, k, 2)?.phi * compute_phi(&tr, 0.0, j, 2)?.phi;
        worst = worst.max(rel(&comp, &full));
    }
    Ok(worst)
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

/// Observed order of the position error when the IMU rate doubles from
/// 25 Hz to 50 Hz.
pub fn integrator_order() -> Result<f64, PropagationError> {
    let dur = 2.0;
    let truth = test_motion(dur, true, true).0;
    let err_at = |rate: f64| -> Result<f64, PropagationError> {
        let tr = test_trajectory(rate, dur, true, true);
        let samples: Vec<_> = tr.iter().map(|p| p.sample).collect();
        Ok((propagate_mean(&tr[0].state, &samples)?.p - truth.p).norm())
    };
    Ok((err_at(25.0)? / err_at(50.0)?).log2())
}
