use std::path::PathBuf;

use ains_estimators::SensorNoise;
use ains_measurement::{Intrinsics, PointSensorModel};
use ains_observability::LineModel;
use ains_propagation::NoiseParams;
use ains_sim::{FeatureSceneSpec, FilterKind, McConfig, MeasurementSpec, Motion, PlaneForm, PriorSigmas, Sinusoid, TrajectorySpec};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Full run configuration. Every section and key is optional; unknown
/// keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Source of all randomness.
    pub seed: u64,
    /// Output directory, overridden by `--out`.
    pub output: Option<PathBuf>,
    pub trajectory: TrajectoryConfig,
    pub scene: SceneConfig,
    pub sensors: SensorConfig,
    pub noise: NoiseConfig,
    pub filter: FilterConfig,
    pub observability: ObservabilityConfig,
    pub mc: McOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            output: None,
            trajectory: TrajectoryConfig::default(),
            scene: SceneConfig::default(),
            sensors: SensorConfig::default(),
            noise: NoiseConfig::default(),
            filter: FilterConfig::default(),
            observability: ObservabilityConfig::default(),
            mc: McOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    #[default]
    Sinusoid,
    PureTranslation,
    ConstantLocalAccel,
    PureRotation,
    TowardPoint,
    ParallelToLine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoryConfig {
    pub motion: MotionKind,
    /// Body-frame acceleration of `constant_local_accel`.
    pub a_body: [f64; 3],
    /// Target of `toward_point`.
    pub target: [f64; 3],
    /// Axis of `parallel_to_line`.
    pub direction: [f64; 3],
    pub duration: f64,
    pub imu_rate: f64,
    pub cam_rate: f64,
    pub bias_g: [f64; 3],
    pub bias_a: [f64; 3],
    pub pos_amp: [f64; 3],
    pub pos_freq: [f64; 3],
    pub ang_amp: [f64; 3],
    pub ang_freq: [f64; 3],
    pub yaw_rate: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        let t = TrajectorySpec::default();
        let ex = Sinusoid::default();
        Self {
            motion: MotionKind::Sinusoid,
            a_body: [0.02, -0.01, 0.05],
            target: [6.0, 0.5, 0.3],
            direction: [0.1, 1.0, 0.2],
            duration: t.duration,
            imu_rate: t.imu_rate,
            cam_rate: t.cam_rate,
            bias_g: t.bias_g.into(),
            bias_a: t.bias_a.into(),
            pos_amp: ex.pos_amp.into(),
            pos_freq: ex.pos_freq.into(),
            ang_amp: ex.ang_amp.into(),
            ang_freq: ex.ang_freq.into(),
            yaw_rate: ex.yaw_rate,
        }
    }
}

fn v3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::from(a)
}

impl TrajectoryConfig {
    pub fn motion(&self) -> Motion {
        match self.motion {
            MotionKind::Sinusoid => Motion::Sinusoid3D,
            MotionKind::PureTranslation => Motion::PureTranslation,
            MotionKind::ConstantLocalAccel => Motion::ConstantLocalAccel { a_body: v3(self.a_body) },
            MotionKind::PureRotation => Motion::PureRotation,
            MotionKind::TowardPoint => Motion::TowardPoint { target: v3(self.target) },
            MotionKind::ParallelToLine => Motion::ParallelToLine { direction: v3(self.direction) },
        }
    }

    pub fn spec(&self) -> TrajectorySpec {
        TrajectorySpec {
            motion: self.motion(),
            excitation: Sinusoid {
                pos_amp: v3(self.pos_amp),
                pos_freq: v3(self.pos_freq),
                ang_amp: v3(self.ang_amp),
                ang_freq: v3(self.ang_freq),
                yaw_rate: self.yaw_rate,
            },
            duration: self.duration,
            imu_rate: self.imu_rate,
            cam_rate: self.cam_rate,
            bias_g: v3(self.bias_g),
            bias_a: v3(self.bias_a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub points: usize,
    pub lines: usize,
    pub planes: usize,
    pub bounds: [f64; 3],
    pub parallel_lines: bool,
    pub line_parallel_plane: bool,
}

impl Default for SceneConfig {
    fn default() -> Self {
        let s = FeatureSceneSpec::default();
        Self { points: 8, lines: 4, planes: 3, bounds: s.bounds.into(), parallel_lines: false, line_parallel_plane: false }
    }
}

impl SceneConfig {
    pub fn spec(&self) -> FeatureSceneSpec {
        FeatureSceneSpec {
            points: self.points,
            lines: self.lines,
            planes: self.planes,
            bounds: v3(self.bounds),
            parallel_lines: self.parallel_lines,
            line_parallel_plane: self.line_parallel_plane,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PointModelKind {
    RangeOnly,
    #[default]
    Mono,
    RangeBearing,
    Stereo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PointParam {
    #[default]
    Euclidean,
    Spherical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LineModelKind {
    #[default]
    Projective,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PlaneFormKind {
    #[default]
    ClosestPoint,
    Hesse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorConfig {
    pub point_model: PointModelKind,
    pub stereo_baseline: f64,
    /// Point parameterization in the observability analysis.
    pub point_param: PointParam,
    /// Line model in the observability analysis.
    pub line_model: LineModelKind,
    pub plane_form: PlaneFormKind,
    /// Focal length and principal point of the filter camera, pixels.
    pub focal: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        let k = SensorNoise::default().intrinsics;
        Self {
            point_model: PointModelKind::Mono,
            stereo_baseline: 0.1,
            point_param: PointParam::Euclidean,
            line_model: LineModelKind::Projective,
            plane_form: PlaneFormKind::ClosestPoint,
            focal: k.f1,
            cx: k.c1,
            cy: k.c2,
        }
    }
}

impl SensorConfig {
    pub fn point_model(&self) -> PointSensorModel {
        match self.point_model {
            PointModelKind::RangeOnly => PointSensorModel::RangeOnly,
            PointModelKind::Mono => PointSensorModel::MonoBearing,
            PointModelKind::RangeBearing => PointSensorModel::RangeBearing,
            PointModelKind::Stereo => PointSensorModel::Stereo { baseline: self.stereo_baseline },
        }
    }

    /// Line model of the observability analysis; projective lines use
    /// normalized intrinsics.
    pub fn line_model(&self) -> LineModel {
        match self.line_model {
            LineModelKind::Projective => LineModel::Projective(Intrinsics::normalized()),
            LineModelKind::Direct => LineModel::Direct,
        }
    }

    pub fn plane_form(&self) -> PlaneForm {
        match self.plane_form {
            PlaneFormKind::ClosestPoint => PlaneForm::ClosestPoint,
            PlaneFormKind::Hesse => PlaneForm::Hesse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub sigma_g: f64,
    pub sigma_wg: f64,
    pub sigma_a: f64,
    pub sigma_wa: f64,
    pub sigma_px: f64,
    pub sigma_range: f64,
    pub sigma_plane: f64,
    pub sigma_plane_angle: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let i = NoiseParams::default();
        let s = SensorNoise::default();
        Self {
            sigma_g: i.sigma_g,
            sigma_wg: i.sigma_wg,
            sigma_a: i.sigma_a,
            sigma_wa: i.sigma_wa,
            sigma_px: s.sigma_px,
            sigma_range: s.sigma_range,
            sigma_plane: s.sigma_plane,
            sigma_plane_angle: s.sigma_plane_angle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FilterKindConfig {
    #[default]
    EkfSlam,
    Msckf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    pub kind: FilterKindConfig,
    /// MSCKF sliding-window length.
    pub window: usize,
    /// Factor on the configured noise used to synthesize data.
    pub data_noise_scale: f64,
    pub initial_error: bool,
    pub prior: PriorConfig,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            kind: FilterKindConfig::EkfSlam,
            window: ains_estimators::DEFAULT_WINDOW,
            data_noise_scale: 1.0,
            initial_error: true,
            prior: PriorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorConfig {
    pub theta: f64,
    pub bg: f64,
    pub v: f64,
    pub ba: f64,
    pub p: f64,
    pub point: f64,
    pub line: f64,
    pub plane: f64,
    pub plane_angle: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        let p = PriorSigmas::default();
        Self {
            theta: p.theta,
            bg: p.bg,
            v: p.v,
            ba: p.ba,
            p: p.p,
            point: p.point,
            line: p.line,
            plane: p.plane,
            plane_angle: p.plane_angle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservabilityConfig {
    /// Case names to verify; empty selects every case.
    pub cases: Vec<String>,
    /// Relative singular-value and residual tolerance, overridden by `--tol`.
    pub tol: f64,
    /// Exteroceptive epochs skipped between observability blocks.
    pub stride: usize,
}

impl Default for ObservabilityConfig {
    fn default() -> Self {
        Self { cases: Vec::new(), tol: ains_observability::DEFAULT_REL_TOL, stride: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McOptions {
    pub runs: usize,
}

impl Default for McOptions {
    fn default() -> Self {
        Self { runs: 50 }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if !(self.observability.tol > 0.0 && self.observability.tol < 1.0) {
            return bad("observability.tol must lie in (0, 1)");
        }
        if self.observability.stride == 0 {
            return bad("observability.stride must be positive");
        }
        if self.sensors.focal.is_nan() || self.sensors.focal <= 0.0 {
            return bad("sensors.focal must be positive");
        }
        let n = &self.noise;
        let sigmas = [n.sigma_g, n.sigma_wg, n.sigma_a, n.sigma_wa, n.sigma_px, n.sigma_range, n.sigma_plane, n.sigma_plane_angle];
        if sigmas.iter().any(|s| s.is_nan() || *s < 0.0) {
            return bad("noise levels must be non-negative");
        }
        for name in &self.observability.cases {
            if crate::scenarios::case_by_name(name).is_none() {
                return Err(CliError::Config(format!("observability.cases: unknown case `{name}`")));
            }
        }
        self.trajectory.spec().validate()?;
        self.scene.spec().validate()?;
        Ok(())
    }

    pub fn measurement(&self) -> MeasurementSpec {
        let n = &self.noise;
        let s = &self.sensors;
        MeasurementSpec {
            point_model: s.point_model(),
            plane_form: s.plane_form(),
            imu: NoiseParams { sigma_g: n.sigma_g, sigma_wg: n.sigma_wg, sigma_a: n.sigma_a, sigma_wa: n.sigma_wa },
            sensor: SensorNoise {
                intrinsics: Intrinsics { f1: s.focal, f2: s.focal, c1: s.cx, c2: s.cy },
                sigma_px: n.sigma_px,
                sigma_range: n.sigma_range,
                sigma_plane: n.sigma_plane,
                sigma_plane_angle: n.sigma_plane_angle,
            },
        }
    }

    pub fn mc_config(&self) -> McConfig {
        let f = &self.filter;
        let p = &f.prior;
        McConfig {
            trajectory: self.trajectory.spec(),
            scene: self.scene.spec(),
            filter: match f.kind {
                FilterKindConfig::EkfSlam => FilterKind::EkfSlam,
                FilterKindConfig::Msckf => FilterKind::Msckf { window: f.window },
            },
            measurement: self.measurement(),
            data_noise_scale: f.data_noise_scale,
            initial_error: f.initial_error,
            prior: PriorSigmas {
                theta: p.theta,
                bg: p.bg,
                v: p.v,
                ba: p.ba,
                p: p.p,
                point: p.point,
                line: p.line,
                plane: p.plane,
                plane_angle: p.plane_angle,
            },
            runs: self.mc.runs,
            seed: self.seed,
        }
    }
}
