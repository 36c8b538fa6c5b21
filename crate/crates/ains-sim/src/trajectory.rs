use std::f64::consts::TAU;

use ains_geometry::{exp_so3, Quat};
use ains_propagation::{gravity, ImuSample, ImuState, TrajPoint};
use nalgebra::{Matrix3, Vector3};

use crate::SimError;

/// Sinusoidal excitation shared by all motion variants.
///
/// Position axis `i` follows `pos_amp[i] sin(2π pos_freq[i] t + φ_i)`; roll,
/// pitch and yaw follow the same pattern with `ang_*`, and yaw additionally
/// drifts at `yaw_rate` rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinusoid {
    pub pos_amp: Vector3<f64>,
    pub pos_freq: Vector3<f64>,
    pub ang_amp: Vector3<f64>,
    pub ang_freq: Vector3<f64>,
    pub yaw_rate: f64,
}

impl Default for Sinusoid {
    fn default() -> Self {
        Self {
            pos_amp: Vector3::new(1.0, 0.8, 0.4),
            pos_freq: Vector3::new(0.10, 0.13, 0.17),
            ang_amp: Vector3::new(0.15, 0.15, 0.25),
            ang_freq: Vector3::new(0.11, 0.07, 0.09),
            yaw_rate: 0.0,
        }
    }
}

const POS_PHASE: [f64; 3] = [0.3, 1.1, 2.0];
const ANG_PHASE: [f64; 3] = [0.7, 1.9, 0.4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Motion {
    Sinusoid3D,
    /// Constant attitude, sinusoidal position.
    PureTranslation,
    /// Rotation only about the body axis along `a_body`, so the body-frame
    /// acceleration stays equal to `a_body`.
    ConstantLocalAccel {
        a_body: Vector3<f64>,
    },
    /// Sinusoidal attitude at the global origin.
    PureRotation,
    /// Position on the ray from the origin through `target`.
    TowardPoint {
        target: Vector3<f64>,
    },
    /// Position on the line through the origin along `direction`.
    ParallelToLine {
        direction: Vector3<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySpec {
    pub motion: Motion,
    pub excitation: Sinusoid,
    pub duration: f64,
    pub imu_rate: f64,
    pub cam_rate: f64,
    pub bias_g: Vector3<f64>,
    pub bias_a: Vector3<f64>,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        Self {
            motion: Motion::Sinusoid3D,
            excitation: Sinusoid::default(),
            duration: 30.0,
            imu_rate: 200.0,
            cam_rate: 10.0,
            bias_g: Vector3::zeros(),
            bias_a: Vector3::zeros(),
        }
    }
}

/// Body-to-global attitude at zero Euler angles: the sensor z axis (optical
/// axis) looks along global +x, sensor x along global -y.
pub fn mount() -> Matrix3<f64> {
    Matrix3::new(0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0)
}

/// Exact kinematics at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    /// Body-to-global rotation.
    pub r_gi: Matrix3<f64>,
    /// Body angular velocity in the body frame.
    pub omega: Vector3<f64>,
    pub p: Vector3<f64>,
    pub v: Vector3<f64>,
    /// Global kinematic acceleration.
    pub acc: Vector3<f64>,
}

impl Kinematics {
    /// `R_IG (a - g)`.
    pub fn specific_force(&self) -> Vector3<f64> {
        self.r_gi.transpose() * (self.acc - gravity())
    }
}

/// `(value, first, second)` derivative of `a sin(2π f t + φ)`.
fn sine(a: f64, f: f64, phase: f64, t: f64) -> (f64, f64, f64) {
    let w = TAU * f;
    let (s, c) = (w * t + phase).sin_cos();
    (a * s, a * w * c, -a * w * w * s)
}

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

/// `R = Rz(ψ) Ry(θ) Rx(φ) M` and its body rate.
fn euler_attitude(ex: &Sinusoid, t: f64) -> (Matrix3<f64>, Vector3<f64>) {
    let (roll, droll, _) = sine(ex.ang_amp.x, ex.ang_freq.x, ANG_PHASE[0], t);
    let (pitch, dpitch, _) = sine(ex.ang_amp.y, ex.ang_freq.y, ANG_PHASE[1], t);
    let (yaw, dyaw, _) = sine(ex.ang_amp.z, ex.ang_freq.z, ANG_PHASE[2], t);
    let (yaw, dyaw) = (yaw + ex.yaw_rate * t, dyaw + ex.yaw_rate);
    let (rxm, rym) = (rx(roll), ry(pitch));
    let m = mount();
    let w_e = rxm.transpose() * rym.transpose() * Vector3::z() * dyaw + rxm.transpose() * Vector3::y() * dpitch + Vector3::x() * droll;
    (rz(yaw) * rym * rxm * m, m.transpose() * w_e)
}

fn sine_position(ex: &Sinusoid, t: f64) -> [Vector3<f64>; 3] {
    let mut out = [Vector3::zeros(); 3];
    for i in 0..3 {
        let (x, dx, ddx) = sine(ex.pos_amp[i], ex.pos_freq[i], POS_PHASE[i], t);
        out[0][i] = x;
        out[1][i] = dx;
        out[2][i] = ddx;
    }
    out
}

/// `α(t) = A (1 - cos 2π f t)` along a unit direction.
fn along(dir: &Vector3<f64>, ex: &Sinusoid, t: f64) -> [Vector3<f64>; 3] {
    let w = TAU * ex.pos_freq.x;
    let a = ex.pos_amp.x;
    let (s, c) = (w * t).sin_cos();
    [dir * a * (1.0 - c), dir * a * w * s, dir * a * w * w * c]
}

impl TrajectorySpec {
    pub fn with_motion(motion: Motion) -> Self {
        Self { motion, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidSpec(m.to_string()));
        if self.duration.is_nan() || self.duration <= 0.0 {
            return bad("duration must be positive");
        }
        if !(self.imu_rate > 0.0 && self.cam_rate > 0.0) {
            return bad("rates must be positive");
        }
        let ratio = self.imu_rate / self.cam_rate;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 {
            return bad("imu_rate must be an integer multiple of cam_rate");
        }
        match self.motion {
            Motion::ConstantLocalAccel { a_body } if a_body.norm() == 0.0 => bad("a_body must be non-zero"),
            Motion::TowardPoint { target } if target.norm() == 0.0 => bad("target must differ from the origin"),
            Motion::ParallelToLine { direction } if direction.norm() == 0.0 => bad("direction must be non-zero"),
            _ => Ok(()),
        }
    }

    /// Exact kinematics of the configured motion at time `t`.
    pub fn kinematics(&self, t: f64) -> Kinematics {
        let ex = &self.excitation;
        let fixed = (mount(), Vector3::zeros());
        let zero = [Vector3::zeros(); 3];
        let ((r_gi, omega), [p, v, acc]) = match self.motion {
            Motion::Sinusoid3D => (euler_attitude(ex, t), sine_position(ex, t)),
            Motion::PureTranslation => (fixed, sine_position(ex, t)),
            Motion::PureRotation => (euler_attitude(ex, t), zero),
            Motion::ConstantLocalAccel { a_body } => {
                let u = a_body.normalize();
                let (psi, dpsi, _) = sine(ex.ang_amp.x, ex.ang_freq.x, ANG_PHASE[0], t);
                let r = mount() * exp_so3(&(u * psi));
                let a_g = mount() * a_body;
                let v0 = -0.5 * self.duration * a_g;
                ((r, u * dpsi), [v0 * t + 0.5 * a_g * t * t, v0 + a_g * t, a_g])
            }
            Motion::TowardPoint { target } => (euler_attitude(ex, t), along(&target.normalize(), ex, t)),
            Motion::ParallelToLine { direction } => (euler_attitude(ex, t), along(&direction.normalize(), ex, t)),
        };
        Kinematics { r_gi, omega, p, v, acc }
    }
}

/// Ground-truth IMU trajectory sampled at the IMU rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<TrajPoint>,
    /// Indices into `points` of the exteroceptive measurement epochs.
    pub cam_idx: Vec<usize>,
}

impl Trajectory {
    pub fn cam_times(&self) -> Vec<f64> {
        self.cam_idx.iter().map(|&i| self.points[i].t).collect()
    }

    pub fn cam_states(&self) -> Vec<ImuState> {
        self.cam_idx.iter().map(|&i| self.points[i].state).collect()
    }
}

/// True states and exact (bias-corrupted, noise-free) IMU readings.
pub fn generate_trajectory(spec: &TrajectorySpec) -> Result<Trajectory, SimError> {
    spec.validate()?;
    let n = (spec.duration * spec.imu_rate).round() as usize;
    let stride = (spec.imu_rate / spec.cam_rate).round() as usize;
    let points = (0..=n)
        .map(|i| {
            let t = i as f64 / spec.imu_rate;
            let k = spec.kinematics(t);
            let state = ImuState { q: Quat::from_rot(&k.r_gi.transpose()), bg: spec.bias_g, v: k.v, ba: spec.bias_a, p: k.p };
            let sample = ImuSample { t, omega: k.omega + spec.bias_g, accel: k.specific_force() + spec.bias_a };
            TrajPoint { t, state, sample }
        })
        .collect();
    let cam_idx = (0..=n).step_by(stride).collect();
    Ok(Trajectory { points, cam_idx })
}
