//! Central-difference checks of the analytic Jacobians on random configurations.

use ains_geometry::{CpPlane, HessePlane, PluckerLine, PointEuclidean, PointSpherical, Pose, Quat};
use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::*;

/// Every analytic Jacobian that has a finite-difference suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianCase {
    RangeOnly,
    MonoBearing,
    RangeBearing,
    Stereo,
    SphericalPoint,
    ProjectiveLine,
    DirectLine,
    CpPlane,
    HessePlane,
    PosX,
    PosY,
    PosZ,
    Orientation,
}

impl JacobianCase {
    pub const ALL: [JacobianCase; 13] = [
        Self::RangeOnly,
        Self::MonoBearing,
        Self::RangeBearing,
        Self::Stereo,
        Self::SphericalPoint,
        Self::ProjectiveLine,
        Self::DirectLine,
        Self::CpPlane,
        Self::HessePlane,
        Self::PosX,
        Self::PosY,
        Self::PosZ,
        Self::Orientation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::RangeOnly => "point_range_only",
            Self::MonoBearing => "point_mono_bearing",
            Self::RangeBearing => "point_range_bearing",
            Self::Stereo => "point_stereo",
            Self::SphericalPoint => "point_spherical",
            Self::ProjectiveLine => "line_projective",
            Self::DirectLine => "line_direct",
            Self::CpPlane => "plane_cp",
            Self::HessePlane => "plane_hesse",
            Self::PosX => "global_pos_x",
            Self::PosY => "global_pos_y",
            Self::PosZ => "global_pos_z",
            Self::Orientation => "global_orientation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteResult {
    pub configs: usize,
    pub max_rel_err: f64,
}

type MeasFn<'a> = Box<dyn Fn(&Pose, &DVector<f64>) -> DVector<f64> + 'a>;

fn unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if v.norm() > 0.2 && v.norm() < 1.0 {
            return v.normalize();
        }
    }
}

fn random_pose(rng: &mut ChaCha8Rng) -> Pose {
    let q = Quat::from_small_angle(&(unit(rng) * rng.random_range(0.0..3.0)));
    let p = Vector3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-2.0..2.0));
    Pose::new(q, p)
}

fn in_front(rng: &mut ChaCha8Rng, pose: &Pose) -> Vector3<f64> {
    let z = rng.random_range(1.0..6.0);
    let local = Vector3::new(rng.random_range(-0.8..0.8) * z, rng.random_range(-0.8..0.8) * z, z);
    pose.rot().transpose() * local + pose.p
}

fn wrap(d: f64) -> f64 {
    (d + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI
}

/// Analytic Jacobian, measurement function and feature boxplus for one case.
struct Config<'a> {
    h: DMatrix<f64>,
    f: MeasFn<'a>,
    fdim: usize,
    angle_rows: Vec<usize>,
}

fn build(case: JacobianCase, rng: &mut ChaCha8Rng, pose: &Pose) -> Option<Config<'static>> {
    let point_case = |model: PointSensorModel, rng: &mut ChaCha8Rng| -> Option<Config<'static>> {
        let pf = in_front(rng, pose);
        let j = point_jacobian(&model, pose, &PointEuclidean::new(pf)).ok()?;
        let f: MeasFn = Box::new(move |ps: &Pose, d: &DVector<f64>| {
            let p = pf + Vector3::new(d[0], d[1], d[2]);
            point_measure(&model, &(ps.rot() * (p - ps.p))).unwrap()
        });
        Some(Config { h: stack(&j), f, fdim: 3, angle_rows: vec![] })
    };
    match case {
        JacobianCase::RangeOnly => point_case(PointSensorModel::RangeOnly, rng),
        JacobianCase::MonoBearing => point_case(PointSensorModel::MonoBearing, rng),
        JacobianCase::RangeBearing => point_case(PointSensorModel::RangeBearing, rng),
        JacobianCase::Stereo => point_case(PointSensorModel::Stereo { baseline: rng.random_range(0.05..0.5) }, rng),
        JacobianCase::SphericalPoint => {
            let model = PointSensorModel::RangeBearing;
            let s = PointSpherical::from_euclidean(&in_front(rng, pose)).ok()?;
            if s.phi.cos() < 0.2 {
                return None;
            }
            let j = point_jacobian_spherical(&model, pose, &s).ok()?;
            let f: MeasFn = Box::new(move |ps: &Pose, d: &DVector<f64>| {
                let p = s.boxplus(&Vector3::new(d[0], d[1], d[2])).to_euclidean();
                point_measure(&model, &(ps.rot() * (p - ps.p))).unwrap()
            });
            Some(Config { h: stack(&j), f, fdim: 3, angle_rows: vec![] })
        }
        JacobianCase::ProjectiveLine | JacobianCase::DirectLine => {
            let a = in_front(rng, pose);
            let b = in_front(rng, pose);
            let l = PluckerLine::from_endpoints(&a, &b).ok()?;
            if l.n.norm() < 0.3 || l.v.norm() < 0.3 {
                return None;
            }
            if case == JacobianCase::DirectLine {
                let vm = unit(rng);
                let (_, j) = line_direct_measure_and_jacobian(pose, &l, &vm).ok()?;
                let f: MeasFn = Box::new(move |ps: &Pose, d: &DVector<f64>| {
                    let m = l.boxplus(&Vector3::new(d[0], d[1], d[2]), d[3]);
                    let (z, _) = line_direct_measure_and_jacobian(ps, &m, &vm).unwrap();
                    DVector::from_column_slice(z.as_slice())
                });
                return Some(Config { h: stack(&j), f, fdim: 4, angle_rows: vec![] });
            }
            let intr = Intrinsics {
                f1: rng.random_range(300.0..600.0),
                f2: rng.random_range(300.0..600.0),
                c1: rng.random_range(200.0..400.0),
                c2: rng.random_range(150.0..300.0),
            };
            let noise = |rng: &mut ChaCha8Rng| Vector3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), 0.0);
            let xs = intr.project_point(&(pose.rot() * (a - pose.p))).ok()? + noise(rng);
            let xe = intr.project_point(&(pose.rot() * (b - pose.p))).ok()? + noise(rng);
            let obs = LineObservation { xs, xe };
            let j = line_jacobian(pose, &l, &intr, &obs).ok()?;
            let f: MeasFn = Box::new(move |ps: &Pose, d: &DVector<f64>| {
                let m = l.boxplus(&Vector3::new(d[0], d[1], d[2]), d[3]);
                let z = line_project_and_measure(&intr, &line_transform_to_local(ps, &m), &obs).unwrap();
                DVector::from_column_slice(z.as_slice())
            });
            Some(Config { h: stack(&j), f, fdim: 4, angle_rows: vec![] })
        }
        JacobianCase::CpPlane => {
            let n = unit(rng);
            let d = rng.random_range(1.0..6.0);
            let pl = CpPlane::new(d * n).ok()?;
            if (d - n.dot(&pose.p)).abs() < 0.5 {
                return None;
            }
            let j = plane_jacobian_cp(pose, &pl).ok()?;
            let f: MeasFn = Box::new(move |ps: &Pose, dd: &DVector<f64>| {
                let q = CpPlane { pi: pl.pi + Vector3::new(dd[0], dd[1], dd[2]) };
                DVector::from_column_slice(plane_transform_to_local(ps, &q).unwrap().pi.as_slice())
            });
            Some(Config { h: stack(&j), f, fdim: 3, angle_rows: vec![] })
        }
        JacobianCase::HessePlane => {
            let n = unit(rng);
            let pl = HessePlane::new(n, rng.random_range(1.0..6.0));
            let ni = pose.rot() * n;
            if n.z.abs() > 0.9 || ni.z.abs() > 0.9 || (pl.d - n.dot(&pose.p)).abs() < 0.5 {
                return None;
            }
            let j = plane_jacobian_hesse(pose, &pl).ok()?;
            let f: MeasFn = Box::new(move |ps: &Pose, d: &DVector<f64>| {
                let q = pl.boxplus(d[0], d[1], d[2]).unwrap();
                DVector::from_column_slice(plane_measure_hesse(ps, &q).unwrap().as_slice())
            });
            Some(Config { h: stack(&j), f, fdim: 3, angle_rows: vec![0] })
        }
        JacobianCase::PosX | JacobianCase::PosY | JacobianCase::PosZ | JacobianCase::Orientation => {
            let model = match case {
                JacobianCase::PosX => GlobalMeasModel::PosX,
                JacobianCase::PosY => GlobalMeasModel::PosY,
                JacobianCase::PosZ => GlobalMeasModel::PosZ,
                _ => GlobalMeasModel::Orientation(unit(rng)),
            };
            let (_, j) = global_measure_and_jacobian(&model, pose);
            let f: MeasFn = Box::new(move |ps: &Pose, _d: &DVector<f64>| global_measure_and_jacobian(&model, ps).0);
            Some(Config { h: stack(&j), f, fdim: 0, angle_rows: vec![] })
        }
    }
}

/// `[H_θ | H_p | H_f]`.
fn stack(j: &FeatureJacobian) -> DMatrix<f64> {
    let r = j.rows();
    let fd = j.h_f.ncols();
    let mut h = DMatrix::zeros(r, 6 + fd);
    h.view_mut((0, 0), (r, 3)).copy_from(&j.h_theta);
    h.view_mut((0, 3), (r, 3)).copy_from(&j.h_p);
    h.view_mut((0, 6), (r, fd)).copy_from(&j.h_f);
    h
}

fn finite_difference(pose: &Pose, c: &Config, step: f64) -> DMatrix<f64> {
    let n = 6 + c.fdim;
    let rows = c.h.nrows();
    let mut out = DMatrix::zeros(rows, n);
    for k in 0..n {
        let mut e = DVector::zeros(n);
        e[k] = step;
        let eval = |s: f64| {
            let d = &e * s;
            let ps = pose.boxplus(&Vector3::new(d[0], d[1], d[2]), &Vector3::new(d[3], d[4], d[5]));
            (c.f)(&ps, &d.rows(6, c.fdim).into_owned())
        };
        let mut col = (eval(1.0) - eval(-1.0)) / (2.0 * step);
        for &r in &c.angle_rows {
            col[r] = wrap(col[r] * 2.0 * step) / (2.0 * step);
        }
        out.set_column(k, &col);
    }
    out
}

/// Runs `n` random configurations of `case` and returns the worst
/// relative error `|H_fd - H|_F / |H|_F`.
pub fn jacobian_suite(case: JacobianCase, n: usize, seed: u64) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < n {
        let pose = random_pose(&mut rng);
        let Some(c) = build(case, &mut rng, &pose) else { continue };
        let fd = finite_difference(&pose, &c, 1e-6);
        worst = worst.max((&fd - &c.h).norm() / c.h.norm());
        done += 1;
    }
    SuiteResult { configs: done, max_rel_err: worst }
}
