//! Scenes, trajectories and expected outcomes of the observability,
//! degenerate-motion and consistency studies.

use ains_geometry::{HessePlane, PointSpherical};
use ains_measurement::{GlobalMeasModel, Intrinsics, PointSensorModel};
use ains_observability::{
    analytic_nullspace, build_observability_matrix, numeric_nullspace, rank_over_time, verify_nullspace, LineModel, NullCase, ObsFeature,
    ObservabilityMatrix,
};
use ains_propagation::TrajPoint;
use ains_sim::{generate_trajectory, sample_scene, FeatureSceneSpec, Motion, Scene, Segment, Trajectory, TrajectorySpec};
use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{LineModelKind, PointParam, SensorConfig};
use crate::CliError;

/// Sensor models and parameterizations of observability features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorChoice {
    pub point_model: PointSensorModel,
    pub spherical: bool,
    pub line_model: LineModel,
    pub hesse: bool,
}

impl Default for SensorChoice {
    /// Euclidean mono points, projective lines, closest-point planes.
    fn default() -> Self {
        Self {
            point_model: PointSensorModel::MonoBearing,
            spherical: false,
            line_model: LineModel::Projective(Intrinsics::normalized()),
            hesse: false,
        }
    }
}

impl SensorChoice {
    /// Spherical mono points, projective lines, Hesse planes.
    pub fn spherical() -> Self {
        Self { spherical: true, hesse: true, ..Self::default() }
    }

    /// Spherical range-bearing points, direct lines, Hesse planes.
    pub fn metric() -> Self {
        Self { point_model: PointSensorModel::RangeBearing, spherical: true, line_model: LineModel::Direct, hesse: true }
    }

    pub fn variants() -> [(&'static str, Self); 3] {
        [("euclidean", Self::default()), ("spherical", Self::spherical()), ("metric", Self::metric())]
    }

    pub fn from_config(s: &SensorConfig) -> Self {
        Self {
            point_model: s.point_model(),
            spherical: s.point_param == PointParam::Spherical,
            line_model: match s.line_model {
                LineModelKind::Projective => LineModel::Projective(Intrinsics::normalized()),
                LineModelKind::Direct => LineModel::Direct,
            },
            hesse: s.plane_form == crate::config::PlaneFormKind::Hesse,
        }
    }
}

/// Trajectory and scene of one observability experiment.
#[derive(Debug, Clone)]
pub struct ObsSetup {
    pub traj: Trajectory,
    pub scene: Scene,
    /// Exteroceptive epochs skipped between observability blocks.
    pub stride: usize,
}

impl ObsSetup {
    pub fn new(traj: &TrajectorySpec, scene: &FeatureSceneSpec, seed: u64, stride: usize) -> Result<Self, CliError> {
        let traj = generate_trajectory(traj)?;
        let poses: Vec<_> = traj.cam_states().iter().map(|s| s.pose()).collect();
        let scene = sample_scene(scene, &poses, &mut ChaCha8Rng::seed_from_u64(seed))?;
        Ok(Self { traj, scene, stride: stride.max(1) })
    }

    pub fn epochs(&self) -> Vec<usize> {
        self.traj.cam_idx.iter().step_by(self.stride).copied().collect()
    }

    /// Reference state of the analytic null spaces.
    pub fn x1(&self) -> &TrajPoint {
        &self.traj.points[self.traj.cam_idx[0]]
    }

    pub fn features(&self, s: &SensorChoice) -> Result<Vec<ObsFeature>, CliError> {
        let mut out = Vec::new();
        for p in &self.scene.points {
            out.push(if s.spherical {
                ObsFeature::SphericalPoint {
                    s: PointSpherical::from_euclidean(p).map_err(ains_measurement::MeasError::from)?,
                    model: s.point_model,
                }
            } else {
                ObsFeature::Point { p: *p, model: s.point_model }
            });
        }
        for l in &self.scene.lines {
            out.push(ObsFeature::Line { l: l.plucker(), model: s.line_model });
        }
        for pl in &self.scene.planes {
            out.push(if s.hesse { ObsFeature::HessePlane(HessePlane::new(pl.normal(), pl.d())) } else { ObsFeature::CpPlane(*pl) });
        }
        Ok(out)
    }

    pub fn matrix(&self, features: &[ObsFeature], globals: &[GlobalMeasModel]) -> Result<ObservabilityMatrix, CliError> {
        Ok(build_observability_matrix(&self.traj.points, &self.epochs(), features, globals)?)
    }

    /// `(t, null_dim)` as blocks are appended.
    pub fn rank_over_time(&self, features: &[ObsFeature], tol: f64) -> Result<Vec<(f64, usize)>, CliError> {
        let om = self.matrix(features, &[])?;
        let epochs = self.epochs();
        Ok(rank_over_time(&om, tol).into_iter().map(|(k, d)| (self.traj.points[epochs[k]].t, d)).collect())
    }
}

/// Analytic null-space case with its canonical scene and expected
/// numeric null dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedCase {
    pub name: &'static str,
    pub case: NullCase,
    pub scene: FeatureSceneSpec,
    pub globals: Vec<GlobalMeasModel>,
    pub dim: usize,
}

/// Feature-only cases on a generic trajectory.
pub fn feature_cases() -> Vec<NamedCase> {
    let c = FeatureSceneSpec::counts;
    let par = FeatureSceneSpec { line_parallel_plane: true, ..c(0, 1, 1) };
    let case = |name, case, scene, dim| NamedCase { name, case, scene, globals: Vec::new(), dim };
    vec![
        case("single_point", NullCase::Points, c(1, 0, 0), 4),
        case("points", NullCase::Points, c(5, 0, 0), 4),
        case("single_line", NullCase::SingleLine, c(0, 1, 0), 5),
        case("lines", NullCase::Lines, c(0, 3, 0), 4),
        case("single_plane", NullCase::SinglePlane, c(0, 0, 1), 7),
        case("two_planes", NullCase::Planes, c(0, 0, 2), 5),
        case("planes", NullCase::Planes, c(0, 0, 3), 4),
        case("point_line", NullCase::PointLine, c(3, 2, 0), 4),
        case("point_plane", NullCase::PointPlane, c(3, 0, 1), 4),
        case("point_line_plane", NullCase::PointLinePlane, c(3, 2, 2), 4),
        case("line_parallel_plane", NullCase::LinePlane { parallel: true }, par, 5),
        case("line_plane", NullCase::LinePlane { parallel: false }, c(0, 1, 1), 4),
    ]
}

/// Global measurements added to a point, line and plane scene.
pub fn global_cases() -> Vec<NamedCase> {
    let scene = FeatureSceneSpec::counts(3, 2, 2);
    let dir = Vector3::new(1.0, 0.5, 0.2);
    let case = |name, case, globals, dim| NamedCase { name, case, scene, globals, dim };
    vec![
        case("global_x", NullCase::GlobalX, vec![GlobalMeasModel::PosX], 2),
        case("global_y", NullCase::GlobalY, vec![GlobalMeasModel::PosY], 2),
        case("global_z", NullCase::GlobalZ, vec![GlobalMeasModel::PosZ], 3),
        case("global_orientation", NullCase::GlobalOrientation(dir), vec![GlobalMeasModel::Orientation(dir)], 3),
        case("global_position", NullCase::GlobalPosition, vec![GlobalMeasModel::PosX, GlobalMeasModel::PosY, GlobalMeasModel::PosZ], 0),
    ]
}

pub fn all_cases() -> Vec<NamedCase> {
    feature_cases().into_iter().chain(global_cases()).collect()
}

pub fn case_by_name(name: &str) -> Option<NamedCase> {
    all_cases().into_iter().find(|c| c.name == name)
}

/// Numeric null dimension and analytic basis residual of one case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    pub name: String,
    pub dim: usize,
    pub expected_dim: usize,
    pub residual: f64,
}

pub fn evaluate_case(
    c: &NamedCase,
    traj: &TrajectorySpec,
    sensors: &SensorChoice,
    seed: u64,
    stride: usize,
    tol: f64,
) -> Result<CaseOutcome, CliError> {
    let s = ObsSetup::new(traj, &c.scene, seed, stride)?;
    let f = s.features(sensors)?;
    let om = s.matrix(&f, &c.globals)?;
    let nb = analytic_nullspace(&c.case, s.x1(), &f)?;
    Ok(CaseOutcome {
        name: c.name.to_string(),
        dim: numeric_nullspace(&om.m, tol).0,
        expected_dim: c.dim,
        residual: verify_nullspace(&om.m, &nb.n)?,
    })
}

/// Expected change of the null dimension under a degenerate motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    Delta(usize),
    AtLeast(usize),
}

impl Expect {
    pub fn holds(&self, base: usize, degen: usize) -> bool {
        match *self {
            Self::Delta(d) => degen == base + d,
            Self::AtLeast(d) => degen >= base + d,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Delta(d) => format!("+{d}"),
            Self::AtLeast(d) => format!(">=+{d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateCase {
    pub name: &'static str,
    pub motion: Motion,
    pub case: NullCase,
    pub expected: Expect,
}

/// Start of the line segment placed parallel to the motion axis.
const PARALLEL_LINE_ANCHOR: [f64; 3] = [5.0, -0.8, 0.4];

/// The five degenerate motions with one point and one line; `target` and
/// `direction` parameterize the toward-point and parallel-to-line motions.
pub fn degenerate_cases(a_body: Vector3<f64>, target: Vector3<f64>, direction: Vector3<f64>) -> Vec<DegenerateCase> {
    vec![
        DegenerateCase {
            name: "pure_translation",
            motion: Motion::PureTranslation,
            case: NullCase::PureTranslation,
            expected: Expect::AtLeast(2),
        },
        DegenerateCase {
            name: "constant_local_accel",
            motion: Motion::ConstantLocalAccel { a_body },
            case: NullCase::ConstantAccel,
            expected: Expect::Delta(1),
        },
        DegenerateCase { name: "pure_rotation", motion: Motion::PureRotation, case: NullCase::PureRotation, expected: Expect::Delta(2) },
        DegenerateCase {
            name: "toward_point",
            motion: Motion::TowardPoint { target },
            case: NullCase::TowardPoint { feature: 0 },
            expected: Expect::Delta(1),
        },
        DegenerateCase {
            name: "parallel_to_line",
            motion: Motion::ParallelToLine { direction: direction.normalize() },
            case: NullCase::ParallelToLine { feature: 1 },
            expected: Expect::Delta(1),
        },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateOutcome {
    pub name: String,
    pub base_dim: usize,
    pub degen_dim: usize,
    /// Residual of the analytic basis including the extra directions.
    pub residual: f64,
    pub expected: Expect,
}

impl DegenerateOutcome {
    pub fn pass(&self, tol: f64) -> bool {
        self.residual < tol && self.expected.holds(self.base_dim, self.degen_dim)
    }
}

/// Null dimension of one point and one line under `base` (generic) and
/// under the degenerate motion of `d`, plus the analytic basis residual.
pub fn evaluate_degenerate(
    d: &DegenerateCase,
    base: &TrajectorySpec,
    sensors: &SensorChoice,
    seed: u64,
    stride: usize,
    tol: f64,
) -> Result<DegenerateOutcome, CliError> {
    let scene = FeatureSceneSpec::counts(1, 1, 0);
    let generic = ObsSetup::new(&TrajectorySpec { motion: Motion::Sinusoid3D, ..*base }, &scene, seed, stride)?;
    let base_dim = numeric_nullspace(&generic.matrix(&generic.features(sensors)?, &[])?.m, tol).0;
    let mut s = ObsSetup::new(&TrajectorySpec { motion: d.motion, ..*base }, &scene, seed, stride)?;
    match d.motion {
        Motion::TowardPoint { target } => s.scene.points[0] = target,
        Motion::ParallelToLine { direction } => {
            let a = Vector3::from(PARALLEL_LINE_ANCHOR);
            s.scene.lines[0] = Segment { a, b: a + 1.6 * direction.normalize() };
        }
        _ => {}
    }
    let f = s.features(sensors)?;
    let om = s.matrix(&f, &[])?;
    let nb = analytic_nullspace(&d.case, s.x1(), &f)?;
    Ok(DegenerateOutcome {
        name: d.name.to_string(),
        base_dim,
        degen_dim: numeric_nullspace(&om.m, tol).0,
        residual: verify_nullspace(&om.m, &nb.n)?,
        expected: d.expected,
    })
}

/// Feature counts `(points, lines, planes)` of the consistency study.
pub fn consistency_scenes() -> [(&'static str, (usize, usize, usize)); 7] {
    [
        ("pt", (8, 0, 0)),
        ("line", (0, 4, 0)),
        ("plane", (0, 0, 3)),
        ("pt+line", (8, 4, 0)),
        ("pt+plane", (8, 0, 3)),
        ("line+plane", (0, 4, 3)),
        ("all", (8, 4, 3)),
    ]
}

/// Point count of the MSCKF consistency run.
pub const MSCKF_POINTS: usize = 30;
