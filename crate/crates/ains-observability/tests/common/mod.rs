#![allow(dead_code)]

use ains_geometry::{HessePlane, PointSpherical};
use ains_measurement::{Intrinsics, PointSensorModel};
use ains_observability::*;
use ains_propagation::TrajPoint;
use ains_sim::*;
use nalgebra::{DMatrix, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STRIDE: usize = 5;

pub struct Setup {
    pub traj: Trajectory,
    pub scene: Scene,
}

impl Setup {
    pub fn new(motion: Motion, scene: FeatureSceneSpec, seed: u64) -> Self {
        let traj = generate_trajectory(&TrajectorySpec::with_motion(motion)).unwrap();
        let poses: Vec<_> = traj.cam_states().iter().map(|s| s.pose()).collect();
        let scene = sample_scene(&scene, &poses, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        Self { traj, scene }
    }

    pub fn epochs(&self) -> Vec<usize> {
        self.traj.cam_idx.iter().step_by(STRIDE).copied().collect()
    }

    pub fn x1(&self) -> &TrajPoint {
        &self.traj.points[self.traj.cam_idx[0]]
    }

    /// Mono points, projective lines and closest-point planes.
    pub fn features(&self) -> Vec<ObsFeature> {
        self.features_with(Variant::Default)
    }

    pub fn features_with(&self, v: Variant) -> Vec<ObsFeature> {
        let model = if v == Variant::Metric { PointSensorModel::RangeBearing } else { PointSensorModel::MonoBearing };
        let mut out = Vec::new();
        for p in &self.scene.points {
            out.push(match v {
                Variant::Default => ObsFeature::Point { p: *p, model },
                _ => ObsFeature::SphericalPoint { s: PointSpherical::from_euclidean(p).unwrap(), model },
            });
        }
        for l in &self.scene.lines {
            let model = if v == Variant::Metric { LineModel::Direct } else { LineModel::Projective(Intrinsics::normalized()) };
            out.push(ObsFeature::Line { l: l.plucker(), model });
        }
        for pl in &self.scene.planes {
            out.push(match v {
                Variant::Default => ObsFeature::CpPlane(*pl),
                _ => ObsFeature::HessePlane(HessePlane::new(pl.normal(), pl.d())),
            });
        }
        out
    }

    pub fn matrix(&self, features: &[ObsFeature], globals: &[ains_measurement::GlobalMeasModel]) -> ObservabilityMatrix {
        build_observability_matrix(&self.traj.points, &self.epochs(), features, globals).unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Euclidean mono points, projective lines, closest-point planes.
    Default,
    /// Spherical mono points, projective lines, Hesse planes.
    Spherical,
    /// Spherical range-bearing points, direct lines, Hesse planes.
    Metric,
}

pub const ALL_VARIANTS: [Variant; 3] = [Variant::Default, Variant::Spherical, Variant::Metric];

pub struct Outcome {
    pub dim: usize,
    pub residual: f64,
    pub span: f64,
    pub basis_rank: usize,
}

pub fn evaluate(m: &DMatrix<f64>, n: &DMatrix<f64>) -> Outcome {
    let (dim, basis) = numeric_nullspace(m, DEFAULT_REL_TOL);
    let residual = verify_nullspace(m, n).unwrap();
    let span = if n.ncols() == 0 { 0.0 } else { span_residual(&basis, n) };
    let basis_rank = if n.ncols() == 0 { 0 } else { n.clone().svd(false, false).rank(1e-9 * n.norm()) };
    Outcome { dim, residual, span, basis_rank }
}

pub fn vec3(x: f64, y: f64, z: f64) -> Vector3<f64> {
    Vector3::new(x, y, z)
}
