use ains_estimators::{
    ekf_propagate, ekf_update, measure, msckf_augment, msckf_update_tracks, triangulate_point, EstError, HybridState, LinearizationMode,
    Observation, StateFeature, Track, TrackObs, Truth, DEFAULT_WINDOW, MIN_TRACK,
};
use ains_geometry::Pose;
use ains_measurement::PointSensorModel;
use ains_propagation::ImuState;
use nalgebra::{DMatrix, DVector, Matrix3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::{
    generate_trajectory, sample_scene, scene_features, simulate_measurements, FeatureSceneSpec, MeasurementSpec, SimData, SimError,
    TrajectorySpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterKind {
    /// Features kept in the state from the first epoch.
    #[default]
    EkfSlam,
    /// Points marginalized over a sliding window of `window` clones.
    Msckf { window: usize },
}

impl FilterKind {
    pub fn msckf() -> Self {
        Self::Msckf { window: DEFAULT_WINDOW }
    }
}

/// Initial standard deviations of the filter; initial errors are drawn
/// from the same distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSigmas {
    pub theta: f64,
    pub bg: f64,
    pub v: f64,
    pub ba: f64,
    pub p: f64,
    pub point: f64,
    /// Line direction error and `δφ`, radians.
    pub line: f64,
    /// Closest-point components and Hesse distance, meters.
    pub plane: f64,
    /// Hesse azimuth and elevation, radians.
    pub plane_angle: f64,
}

impl Default for PriorSigmas {
    fn default() -> Self {
        Self { theta: 0.02, bg: 1e-3, v: 0.1, ba: 0.02, p: 0.1, point: 0.1, line: 0.02, plane: 0.1, plane_angle: 0.02 }
    }
}

impl PriorSigmas {
    fn diagonal(&self, features: &[StateFeature]) -> DVector<f64> {
        let mut d = Vec::new();
        for (s, k) in [(self.theta, 3), (self.bg, 3), (self.v, 3), (self.ba, 3), (self.p, 3)] {
            d.extend(std::iter::repeat_n(s, k));
        }
        for f in features {
            match f {
                StateFeature::Point(_) => d.extend([self.point; 3]),
                StateFeature::Line(_) => d.extend([self.line; 4]),
                StateFeature::CpPlane(_) => d.extend([self.plane; 3]),
                StateFeature::HessePlane(_) => d.extend([self.plane_angle, self.plane_angle, self.plane]),
            }
        }
        DVector::from_vec(d)
    }
}

/// Monte-Carlo experiment: one fixed trajectory and scene, `runs`
/// independent noise realizations, each filtered in both linearization
/// modes.
#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub trajectory: TrajectorySpec,
    pub scene: FeatureSceneSpec,
    pub filter: FilterKind,
    /// Noise levels assumed by the filter.
    pub measurement: MeasurementSpec,
    /// Factor on the filter noise levels used to synthesize data.
    pub data_noise_scale: f64,
    /// Draw the initial estimate from the prior instead of starting at truth.
    pub initial_error: bool,
    pub prior: PriorSigmas,
    pub runs: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            trajectory: TrajectorySpec::default(),
            scene: FeatureSceneSpec::counts(8, 0, 0),
            filter: FilterKind::EkfSlam,
            measurement: MeasurementSpec::default(),
            data_noise_scale: 1.0,
            initial_error: true,
            prior: PriorSigmas::default(),
            runs: 50,
            seed: 1,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidSpec(m.to_string()));
        if self.runs == 0 {
            return bad("runs must be positive");
        }
        if self.data_noise_scale.is_nan() || self.data_noise_scale < 0.0 {
            return bad("data_noise_scale must be non-negative");
        }
        if let FilterKind::Msckf { window } = self.filter {
            if window < MIN_TRACK {
                return bad("window must hold at least MIN_TRACK clones");
            }
            if self.measurement.point_model != PointSensorModel::MonoBearing {
                return bad("MSCKF needs monocular bearing points");
            }
            if self.scene.lines + self.scene.planes > 0 || self.scene.points == 0 {
                return bad("MSCKF runs on point-only scenes");
            }
        }
        self.trajectory.validate()?;
        self.scene.validate()
    }
}

/// Per-epoch statistics of one linearization mode.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModeReport {
    pub ori_rmse_deg: Vec<f64>,
    pub pos_rmse_m: Vec<f64>,
    /// Run-averaged 3-dof orientation NEES.
    pub ori_nees: Vec<f64>,
    /// Run-averaged 3-dof position NEES.
    pub pos_nees: Vec<f64>,
}

impl ModeReport {
    pub fn mean_ori_nees(&self) -> f64 {
        mean(&self.ori_nees)
    }

    pub fn mean_pos_nees(&self) -> f64 {
        mean(&self.pos_nees)
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    /// Exteroceptive epochs at which statistics are taken.
    pub times: Vec<f64>,
    pub standard: ModeReport,
    pub ideal: ModeReport,
    pub runs: usize,
    /// Seed of each run's noise realization.
    pub seeds: Vec<u64>,
}

/// Seed of run `run`.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    seed.wrapping_add((run as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// `(ori err² deg², pos err² m², ori NEES, pos NEES)` at one epoch.
type Sample = [f64; 4];

fn nees(e: &Vector3<f64>, p: Matrix3<f64>) -> Result<f64, EstError> {
    let chol = p.cholesky().ok_or(EstError::CovarianceNotPSD(p.symmetric_eigenvalues().min()))?;
    Ok(e.dot(&chol.solve(e)))
}

fn sample(s: &HybridState, truth: &ImuState) -> Result<Sample, EstError> {
    let e = s.imu.boxminus(truth);
    let th = Vector3::new(e[0], e[1], e[2]);
    let p = Vector3::new(e[12], e[13], e[14]);
    let block = |o: usize| Matrix3::from_fn(|i, j| s.cov[(o + i, o + j)]);
    Ok([th.norm().to_degrees().powi(2), p.norm_squared(), nees(&th, block(0))?, nees(&p, block(12))?])
}

fn initial_state<R: Rng>(cfg: &McConfig, truth: &ImuState, features: &[StateFeature], rng: &mut R) -> Result<HybridState, EstError> {
    let sig = cfg.prior.diagonal(features);
    let cov = DMatrix::from_diagonal(&sig.map(|s| s * s));
    let exact = HybridState::new(0.0, *truth, features.to_vec(), cov);
    if !cfg.initial_error {
        return Ok(exact);
    }
    let dx = DVector::from_fn(sig.len(), |i, _| -sig[i] * rng.sample::<f64, _>(StandardNormal));
    exact.boxplus(&dx)
}

fn run_ekf(cfg: &McConfig, data: &SimData, init: &HybridState, mode: &LinearizationMode) -> Result<Vec<Sample>, EstError> {
    let m = &cfg.measurement;
    let mut s = init.clone();
    let mut out = Vec::with_capacity(data.frames.len());
    for (k, fr) in data.frames.iter().enumerate() {
        if k > 0 {
            s = ekf_propagate(&s, &data.samples[data.frames[k - 1].idx..=fr.idx], &m.imu, mode)?;
        }
        let pose = s.imu.pose();
        let usable: Vec<(usize, Observation)> =
            fr.obs.iter().filter(|(id, o)| measure(o, &pose, &s.features[*id], &m.sensor).is_ok()).cloned().collect();
        s = ekf_update(&s, &usable, &m.sensor, mode)?;
        out.push(sample(&s, &data.truth[fr.idx].state)?);
    }
    Ok(out)
}

fn run_msckf(cfg: &McConfig, data: &SimData, init: &HybridState, window: usize, mode: &LinearizationMode) -> Result<Vec<Sample>, EstError> {
    let m = &cfg.measurement;
    let n_pts = cfg.scene.points;
    let mut s = init.clone();
    let mut open: Vec<Vec<(f64, Observation)>> = vec![Vec::new(); n_pts];
    let mut out = Vec::with_capacity(data.frames.len());
    for (k, fr) in data.frames.iter().enumerate() {
        if k > 0 {
            s = ekf_propagate(&s, &data.samples[data.frames[k - 1].idx..=fr.idx], &m.imu, mode)?;
        }
        s = msckf_augment(&s, window)?;
        for (id, o) in &fr.obs {
            open[*id].push((fr.t, o.clone()));
        }
        let last = k + 1 == data.frames.len();
        let mut ready = Vec::new();
        for (id, track) in open.iter_mut().enumerate() {
            let ends = (k + window - id % window) % window == window - 1;
            if !(ends || last) || track.is_empty() {
                continue;
            }
            let track = std::mem::take(track);
            if let Some(t) = build_track(&s, id, &track) {
                ready.push(t);
            }
        }
        if !ready.is_empty() {
            s = msckf_update_tracks(&s, &ready, &m.sensor, mode)?.0;
        }
        out.push(sample(&s, &data.truth[fr.idx].state)?);
    }
    Ok(out)
}

/// Maps a feature's observations onto the clones and triangulates it.
fn build_track(s: &HybridState, id: usize, obs: &[(f64, Observation)]) -> Option<Track> {
    if obs.len() < MIN_TRACK {
        return None;
    }
    let mut track = Vec::with_capacity(obs.len());
    let mut poses: Vec<Pose> = Vec::with_capacity(obs.len());
    let mut bearings = Vec::with_capacity(obs.len());
    for (t, o) in obs {
        let clone = s.clones.iter().position(|c| (c.t - t).abs() <= 1e-9)?;
        let Observation::Point { z, .. } = o else { return None };
        poses.push(s.clones[clone].pose());
        bearings.push(Vector2::new(z[0], z[1]));
        track.push(TrackObs { clone, obs: o.clone() });
    }
    let p = triangulate_point(&poses, &bearings)?;
    Some(Track { id, obs: track, feat: StateFeature::Point(p) })
}

type RunResult = Result<(Vec<Sample>, Vec<Sample>), SimError>;

/// Runs every configured realization (on `jobs` threads, or the global
/// pool when `None`) and averages the statistics. The report does not
/// depend on the thread count.
pub fn run_monte_carlo(cfg: &McConfig, jobs: Option<usize>) -> Result<McReport, SimError> {
    cfg.validate()?;
    let traj = generate_trajectory(&cfg.trajectory)?;
    let poses: Vec<Pose> = traj.cam_states().iter().map(|s| s.pose()).collect();
    let scene = sample_scene(&cfg.scene, &poses, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
    let features = scene_features(&scene, cfg.measurement.plane_form)?;
    let data_spec = cfg.measurement.scaled(cfg.data_noise_scale);
    let seeds: Vec<u64> = (0..cfg.runs).map(|r| run_seed(cfg.seed, r)).collect();

    let one = |seed: u64| -> RunResult {
        let fail = |e: EstError| SimError::Filter(format!("seed {seed}: {e}"));
        let data = simulate_measurements(&traj, &scene, &data_spec, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let in_state: &[StateFeature] = if cfg.filter == FilterKind::EkfSlam { &features } else { &[] };
        let init = initial_state(cfg, &data.truth[0].state, in_state, &mut rng).map_err(fail)?;
        let ideal = LinearizationMode::Ideal(Truth { traj: &data.truth, features: &features });
        let run = |mode: &LinearizationMode| match cfg.filter {
            FilterKind::EkfSlam => run_ekf(cfg, &data, &init, mode),
            FilterKind::Msckf { window } => run_msckf(cfg, &data, &init, window, mode),
        };
        Ok((run(&LinearizationMode::Standard).map_err(fail)?, run(&ideal).map_err(fail)?))
    };
    let results: Vec<RunResult> = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| SimError::InvalidSpec(e.to_string()))?
            .install(|| seeds.par_iter().map(|&s| one(s)).collect()),
        None => seeds.par_iter().map(|&s| one(s)).collect(),
    };

    let n = traj.cam_idx.len();
    let mut acc = [vec![[0.0; 4]; n], vec![[0.0; 4]; n]];
    for r in results {
        let (std_run, ideal_run) = r?;
        for (a, run) in acc.iter_mut().zip([std_run, ideal_run]) {
            for (slot, x) in a.iter_mut().zip(run) {
                for i in 0..4 {
                    slot[i] += x[i];
                }
            }
        }
    }
    let runs = cfg.runs as f64;
    let report = |a: &[Sample]| ModeReport {
        ori_rmse_deg: a.iter().map(|x| (x[0] / runs).sqrt()).collect(),
        pos_rmse_m: a.iter().map(|x| (x[1] / runs).sqrt()).collect(),
        ori_nees: a.iter().map(|x| x[2] / runs).collect(),
        pos_nees: a.iter().map(|x| x[3] / runs).collect(),
    };
    Ok(McReport { times: traj.cam_times(), standard: report(&acc[0]), ideal: report(&acc[1]), runs: cfg.runs, seeds })
}

/// Two-sided 95% interval of the run-averaged NEES of a consistent
/// `dof`-dimensional estimate over `runs` runs (Wilson-Hilferty
/// approximation of the chi-square quantiles).
pub fn nees_interval(dof: usize, runs: usize) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    let k = (dof * runs) as f64;
    let c = 2.0 / (9.0 * k);
    let q = |z: f64| k * (1.0 - c + z * c.sqrt()).powi(3) / runs as f64;
    (q(-Z), q(Z))
}
