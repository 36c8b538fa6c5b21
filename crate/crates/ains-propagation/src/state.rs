use ains_geometry::{Pose, Quat};
use nalgebra::{SVector, Vector3};

use crate::{gravity, PropagationError};

/// IMU nominal state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ImuState {
    pub q: Quat,
    pub bg: Vector3<f64>,
    pub v: Vector3<f64>,
    pub ba: Vector3<f64>,
    pub p: Vector3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    pub omega: Vector3<f64>,
    pub accel: Vector3<f64>,
}

/// Continuous-time noise densities: gyro, gyro bias walk, accel, accel bias walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub sigma_g: f64,
    pub sigma_wg: f64,
    pub sigma_a: f64,
    pub sigma_wa: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self { sigma_g: 1e-3, sigma_wg: 1e-5, sigma_a: 1e-2, sigma_wa: 1e-4 }
    }
}

/// State and IMU reading at one grid time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajPoint {
    pub t: f64,
    pub state: ImuState,
    pub sample: ImuSample,
}

impl ImuState {
    pub fn pose(&self) -> Pose {
        Pose::new(self.q, self.p)
    }

    pub fn boxplus(&self, dx: &SVector<f64, 15>) -> ImuState {
        let seg = |i: usize| Vector3::new(dx[i], dx[i + 1], dx[i + 2]);
        ImuState { q: self.q.boxplus(&seg(0)), bg: self.bg + seg(3), v: self.v + seg(6), ba: self.ba + seg(9), p: self.p + seg(12) }
    }

    /// Error `e` such that `other ~ self.boxplus(e)`.
    pub fn boxminus(&self, other: &ImuState) -> SVector<f64, 15> {
        let mut e = SVector::<f64, 15>::zeros();
        e.fixed_rows_mut::<3>(0).copy_from(&self.q.boxminus(&other.q));
        e.fixed_rows_mut::<3>(3).copy_from(&(other.bg - self.bg));
        e.fixed_rows_mut::<3>(6).copy_from(&(other.v - self.v));
        e.fixed_rows_mut::<3>(9).copy_from(&(other.ba - self.ba));
        e.fixed_rows_mut::<3>(12).copy_from(&(other.p - self.p));
        e
    }
}

#[derive(Clone, Copy)]
struct Kin {
    q: [f64; 4],
    v: Vector3<f64>,
    p: Vector3<f64>,
}

fn deriv(k: &Kin, omega: &Vector3<f64>, accel: &Vector3<f64>) -> Kin {
    let q = Quat::new(k.q[0], k.q[1], k.q[2], k.q[3]);
    let dq = Quat::omega_product(omega, &Quat { x: k.q[0], y: k.q[1], z: k.q[2], w: k.q[3] });
    Kin { q: [0.5 * dq[0], 0.5 * dq[1], 0.5 * dq[2], 0.5 * dq[3]], v: q.rot().transpose() * accel + gravity(), p: k.v }
}

fn axpy(k: &Kin, h: f64, d: &Kin) -> Kin {
    Kin { q: [k.q[0] + h * d.q[0], k.q[1] + h * d.q[1], k.q[2] + h * d.q[2], k.q[3] + h * d.q[3]], v: k.v + h * d.v, p: k.p + h * d.p }
}

/// Cubic Lagrange interpolation of the IMU readings at time `t` inside
/// the interval `[i, i + 1]`, using up to four neighbouring samples.
fn interp(samples: &[ImuSample], i: usize, t: f64) -> (Vector3<f64>, Vector3<f64>) {
    let n = samples.len();
    let width = n.min(4);
    let start = (i as isize - 1).clamp(0, (n - width) as isize) as usize;
    let idx = start..start + width;
    let mut w = Vector3::zeros();
    let mut a = Vector3::zeros();
    for j in idx.clone() {
        let mut l = 1.0;
        for m in idx.clone() {
            if m != j {
                l *= (t - samples[m].t) / (samples[j].t - samples[m].t);
            }
        }
        w += l * samples[j].omega;
        a += l * samples[j].accel;
    }
    (w, a)
}

fn rk4_step(s: &ImuState, samples: &[ImuSample], i: usize) -> ImuState {
    let s0 = &samples[i];
    let s1 = &samples[i + 1];
    let h = s1.t - s0.t;
    let (wm, am) = interp(samples, i, s0.t + 0.5 * h);
    let w0 = s0.omega - s.bg;
    let a0 = s0.accel - s.ba;
    let w1 = s1.omega - s.bg;
    let a1 = s1.accel - s.ba;
    let wm = wm - s.bg;
    let am = am - s.ba;
    let k = Kin { q: [s.q.x, s.q.y, s.q.z, s.q.w], v: s.v, p: s.p };
    let k1 = deriv(&k, &w0, &a0);
    let k2 = deriv(&axpy(&k, 0.5 * h, &k1), &wm, &am);
    let k3 = deriv(&axpy(&k, 0.5 * h, &k2), &wm, &am);
    let k4 = deriv(&axpy(&k, h, &k3), &w1, &a1);
    let mut out = k;
    for j in 0..4 {
        out.q[j] += h / 6.0 * (k1.q[j] + 2.0 * k2.q[j] + 2.0 * k3.q[j] + k4.q[j]);
    }
    out.v += h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    out.p += h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    ImuState { q: Quat::new(out.q[0], out.q[1], out.q[2], out.q[3]), bg: s.bg, v: out.v, ba: s.ba, p: out.p }
}

fn check(samples: &[ImuSample]) -> Result<(), PropagationError> {
    if samples.is_empty() {
        return Err(PropagationError::EmptySampleSeq);
    }
    if samples.windows(2).any(|w| w[1].t <= w[0].t) {
        return Err(PropagationError::NonIncreasingTime);
    }
    Ok(())
}

/// Integrates the kinematics from the first to the last sample time (RK4).
pub fn propagate_mean(state: &ImuState, samples: &[ImuSample]) -> Result<ImuState, PropagationError> {
    check(samples)?;
    let mut s = *state;
    for i in 0..samples.len() - 1 {
        s = rk4_step(&s, samples, i);
    }
    Ok(s)
}

/// Like [`propagate_mean`] but keeps the state at every sample time.
pub fn propagate_trajectory(state: &ImuState, samples: &[ImuSample]) -> Result<Vec<TrajPoint>, PropagationError> {
    check(samples)?;
    let mut out = Vec::with_capacity(samples.len());
    let mut s = *state;
    out.push(TrajPoint { t: samples[0].t, state: s, sample: samples[0] });
    for i in 0..samples.len() - 1 {
        s = rk4_step(&s, samples, i);
        out.push(TrajPoint { t: samples[i + 1].t, state: s, sample: samples[i + 1] });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ains_geometry::exp_so3;
    use nalgebra::Matrix3;

    fn grid(rate: f64, dur: f64, f: impl Fn(f64) -> (Vector3<f64>, Vector3<f64>)) -> Vec<ImuSample> {
        let n = (rate * dur).round() as usize;
        (0..=n)
            .map(|i| {
                let t = i as f64 / rate;
                let (omega, accel) = f(t);
                ImuSample { t, omega, accel }
            })
            .collect()
    }

    #[test]
    fn free_fall() {
        let s0 = ImuState { v: Vector3::new(1.0, -2.0, 3.0), p: Vector3::new(0.5, 0.0, 1.0), ..Default::default() };
        let samples = grid(200.0, 1.0, |_| (Vector3::zeros(), Vector3::zeros()));
        let s = propagate_mean(&s0, &samples).unwrap();
        let expect = s0.p + s0.v + 0.5 * gravity();
        assert!((s.p - expect).norm() < 1e-9);
    }

    #[test]
    fn constant_yaw_rate() {
        let samples = grid(200.0, 1.0, |_| (Vector3::z(), Vector3::new(0.0, 0.0, 9.81)));
        let s = propagate_mean(&ImuState::default(), &samples).unwrap();
        let expect = exp_so3(&Vector3::new(0.0, 0.0, -1.0));
        assert!((s.q.rot() - expect).norm() < 1e-8);
        assert!(s.p.norm() < 1e-9);
    }

    #[test]
    fn biases_are_subtracted() {
        let bg = Vector3::new(0.01, -0.02, 0.03);
        let ba = Vector3::new(0.1, 0.2, -0.1);
        let s0 = ImuState { bg, ba, ..Default::default() };
        let samples = grid(100.0, 1.0, |_| (bg, ba + Vector3::new(0.0, 0.0, 9.81)));
        let s = propagate_mean(&s0, &samples).unwrap();
        assert!((s.q.rot() - Matrix3::identity()).norm() < 1e-12);
        assert!(s.p.norm() < 1e-10 && s.v.norm() < 1e-10);
    }

    #[test]
    fn empty_and_unordered() {
        assert_eq!(propagate_mean(&ImuState::default(), &[]), Err(PropagationError::EmptySampleSeq));
        let s = ImuSample { t: 0.0, omega: Vector3::zeros(), accel: Vector3::zeros() };
        assert_eq!(propagate_mean(&ImuState::default(), &[s, s]), Err(PropagationError::NonIncreasingTime));
        assert_eq!(propagate_mean(&ImuState::default(), &[s]).unwrap(), ImuState::default());
    }

    #[test]
    fn boxplus_boxminus() {
        let s = ImuState { q: Quat::new(0.1, 0.2, -0.3, 0.9), v: Vector3::new(1.0, 2.0, 3.0), ..Default::default() };
        let mut e = SVector::<f64, 15>::zeros();
        for i in 0..15 {
            e[i] = 0.01 * (i as f64 - 7.0);
        }
        let t = s.boxplus(&e);
        assert!((s.boxminus(&t) - e).norm() < 1e-12);
    }
}
