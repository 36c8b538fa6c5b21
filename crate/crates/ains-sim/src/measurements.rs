use ains_estimators::{measure, Observation, SensorNoise, StateFeature};
use ains_measurement::{LineObservation, MeasError, PointSensorModel};
use ains_propagation::{propagate_trajectory, ImuSample, ImuState, NoiseParams, TrajPoint};
use nalgebra::{DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Scene, SimError, Trajectory};

/// State parameterization of planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlaneForm {
    #[default]
    ClosestPoint,
    Hesse,
}

/// Sensor models and noise used to synthesize data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSpec {
    pub point_model: PointSensorModel,
    pub plane_form: PlaneForm,
    pub imu: NoiseParams,
    pub sensor: SensorNoise,
}

impl Default for MeasurementSpec {
    fn default() -> Self {
        Self {
            point_model: PointSensorModel::MonoBearing,
            plane_form: PlaneForm::ClosestPoint,
            imu: NoiseParams::default(),
            sensor: SensorNoise::default(),
        }
    }
}

impl MeasurementSpec {
    /// Scales every IMU and sensor noise level by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let n = self.imu;
        Self {
            imu: NoiseParams { sigma_g: k * n.sigma_g, sigma_wg: k * n.sigma_wg, sigma_a: k * n.sigma_a, sigma_wa: k * n.sigma_wa },
            sensor: self.sensor.scaled(k),
            ..*self
        }
    }
}

/// Observations at one exteroceptive epoch; `idx` indexes the IMU grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub idx: usize,
    pub t: f64,
    pub obs: Vec<(usize, Observation)>,
}

/// True states with random-walk biases, the IMU readings handed to a
/// filter, and the exteroceptive frames.
#[derive(Debug, Clone, PartialEq)]
pub struct SimData {
    pub truth: Vec<TrajPoint>,
    pub samples: Vec<ImuSample>,
    pub frames: Vec<Frame>,
}

/// Scene features in filter order: points, lines, planes.
pub fn scene_features(scene: &Scene, plane_form: PlaneForm) -> Result<Vec<StateFeature>, SimError> {
    let mut out: Vec<StateFeature> = scene.points.iter().map(|p| StateFeature::Point(*p)).collect();
    out.extend(scene.lines.iter().map(|s| StateFeature::Line(s.plucker())));
    for pl in &scene.planes {
        out.push(match plane_form {
            PlaneForm::ClosestPoint => StateFeature::CpPlane(*pl),
            PlaneForm::Hesse => StateFeature::HessePlane(pl.to_hesse().map_err(|e| SimError::InvalidSpec(e.to_string()))?),
        });
    }
    Ok(out)
}

fn gauss<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn gauss3<R: Rng>(rng: &mut R) -> Vector3<f64> {
    Vector3::from_fn(|_, _| gauss(rng))
}

/// Truth re-integrated from the bias-free readings, so the filter's own
/// integrator reproduces it exactly; the biases follow random walks.
fn truth_with_bias_walk<R: Rng>(traj: &Trajectory, imu: &NoiseParams, rng: &mut R) -> Result<Vec<TrajPoint>, SimError> {
    let pts = &traj.points;
    let clean: Vec<ImuSample> =
        pts.iter().map(|p| ImuSample { t: p.t, omega: p.sample.omega - p.state.bg, accel: p.sample.accel - p.state.ba }).collect();
    let start = ImuState { bg: Vector3::zeros(), ba: Vector3::zeros(), ..pts[0].state };
    let mut truth = propagate_trajectory(&start, &clean).map_err(|e| SimError::InvalidSpec(e.to_string()))?;
    let (mut bg, mut ba) = (pts[0].state.bg, pts[0].state.ba);
    for i in 0..truth.len() {
        if i > 0 {
            let dt = truth[i].t - truth[i - 1].t;
            bg += imu.sigma_wg * dt.sqrt() * gauss3(rng);
            ba += imu.sigma_wa * dt.sqrt() * gauss3(rng);
        }
        let tp = &mut truth[i];
        tp.state.bg = bg;
        tp.state.ba = ba;
        tp.sample = ImuSample { t: tp.t, omega: clean[i].omega + bg, accel: clean[i].accel + ba };
    }
    Ok(truth)
}

fn noisy(z: &DVector<f64>, sigma: &DVector<f64>, rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(z.len(), |i, _| z[i] + sigma[i] * gauss(rng))
}

/// Noisy reading of every visible feature at each exteroceptive epoch,
/// plus noisy IMU readings. Features behind the sensor are skipped.
pub fn simulate_measurements(traj: &Trajectory, scene: &Scene, spec: &MeasurementSpec, seed: u64) -> Result<SimData, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = truth_with_bias_walk(traj, &spec.imu, &mut rng)?;
    let samples = truth
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let dt = if i + 1 < truth.len() { truth[i + 1].t - p.t } else { p.t - truth[i - 1].t };
            let s = dt.sqrt();
            ImuSample {
                t: p.t,
                omega: p.sample.omega + spec.imu.sigma_g / s * gauss3(&mut rng),
                accel: p.sample.accel + spec.imu.sigma_a / s * gauss3(&mut rng),
            }
        })
        .collect();
    let features = scene_features(scene, spec.plane_form)?;
    let sn = &spec.sensor;
    let px = sn.sigma_px;
    let mut frames = Vec::with_capacity(traj.cam_idx.len());
    for &idx in &traj.cam_idx {
        let pose = truth[idx].state.pose();
        let mut obs = Vec::new();
        for (id, f) in features.iter().enumerate() {
            let like = match f {
                StateFeature::Point(_) => Observation::Point { model: spec.point_model, z: DVector::zeros(spec.point_model.dim()) },
                StateFeature::Line(_) => {
                    let seg = &scene.lines[id - scene.points.len()];
                    let local = |p: &Vector3<f64>| pose.rot() * (p - pose.p);
                    let (a, b) = match (sn.intrinsics.project_point(&local(&seg.a)), sn.intrinsics.project_point(&local(&seg.b))) {
                        (Ok(a), Ok(b)) => (a, b),
                        _ => continue,
                    };
                    let mut jitter = |x: Vector3<f64>| Vector3::new(x.x + px * gauss(&mut rng), x.y + px * gauss(&mut rng), 1.0);
                    let (xs, xe) = (jitter(a), jitter(b));
                    obs.push((id, Observation::Line(LineObservation { xs, xe })));
                    continue;
                }
                StateFeature::CpPlane(_) => Observation::CpPlane(Vector3::zeros()),
                StateFeature::HessePlane(_) => Observation::HessePlane(Vector3::zeros()),
            };
            let z = match measure(&like, &pose, f, sn) {
                Ok(z) => z,
                Err(ains_estimators::EstError::Measurement(MeasError::BehindCamera | MeasError::ZeroRange)) => continue,
                Err(e) => return Err(SimError::InvalidSpec(e.to_string())),
            };
            let z = noisy(&z, &sn.sigmas(&like), &mut rng);
            let o = match like {
                Observation::Point { model, .. } => Observation::Point { model, z },
                Observation::CpPlane(_) => Observation::CpPlane(Vector3::new(z[0], z[1], z[2])),
                _ => Observation::HessePlane(Vector3::new(z[0], z[1], z[2])),
            };
            obs.push((id, o));
        }
        frames.push(Frame { idx, t: truth[idx].t, obs });
    }
    Ok(SimData { truth, samples, frames })
}
