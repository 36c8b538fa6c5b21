use ains_geometry::{CpPlane, PluckerLine, Pose};
use nalgebra::Vector3;
use rand::Rng;

use crate::SimError;

/// Feature counts, workspace and geometric constraints of a scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureSceneSpec {
    pub points: usize,
    pub lines: usize,
    pub planes: usize,
    /// Full workspace extent, centered at the origin.
    pub bounds: Vector3<f64>,
    /// All lines share one direction.
    pub parallel_lines: bool,
    /// All lines are parallel to the first plane.
    pub line_parallel_plane: bool,
}

impl Default for FeatureSceneSpec {
    fn default() -> Self {
        Self { points: 0, lines: 0, planes: 0, bounds: Vector3::new(10.0, 10.0, 5.0), parallel_lines: false, line_parallel_plane: false }
    }
}

impl FeatureSceneSpec {
    pub fn counts(points: usize, lines: usize, planes: usize) -> Self {
        Self { points, lines, planes, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.parallel_lines && self.lines < 2 {
            return Err(SimError::InvalidSpec("parallel_lines needs at least two lines".into()));
        }
        if self.line_parallel_plane && (self.lines == 0 || self.planes == 0) {
            return Err(SimError::InvalidSpec("line_parallel_plane needs a line and a plane".into()));
        }
        if self.bounds.iter().any(|b| b.is_nan() || *b <= 0.0) {
            return Err(SimError::InvalidSpec("bounds must be positive".into()));
        }
        Ok(())
    }
}

/// Line segment whose end points are observed in images.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
}

impl Segment {
    pub fn plucker(&self) -> PluckerLine {
        PluckerLine { n: self.a.cross(&self.b), v: self.b - self.a }
    }

    pub fn direction(&self) -> Vector3<f64> {
        (self.b - self.a).normalize()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub points: Vec<Vector3<f64>>,
    pub lines: Vec<Segment>,
    pub planes: Vec<CpPlane>,
}

/// Closest a point may get to the image plane, in meters.
pub const MIN_DEPTH: f64 = 1.0;
/// Half field of view, as `tan` of the angle on each image axis.
pub const HALF_FOV_TAN: f64 = 1.0;
const MAX_TRIES: usize = 20_000;
const MIN_LINE_ANGLE_DEG: f64 = 1.0;
const MIN_PLANE_CLEARANCE: f64 = 1.0;

/// True when `p` is inside the frustum of every pose.
pub fn visible_from_all(p: &Vector3<f64>, poses: &[Pose]) -> bool {
    poses.iter().all(|ps| {
        let l = ps.rot() * (p - ps.p);
        l.z >= MIN_DEPTH && l.x.abs() <= HALF_FOV_TAN * l.z && l.y.abs() <= HALF_FOV_TAN * l.z
    })
}

fn uniform_in<R: Rng>(rng: &mut R, bounds: &Vector3<f64>) -> Vector3<f64> {
    Vector3::from_fn(|i, _| rng.random_range(-0.5..0.5) * bounds[i])
}

fn unit<R: Rng>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn inside(p: &Vector3<f64>, bounds: &Vector3<f64>) -> bool {
    (0..3).all(|i| p[i].abs() <= 0.5 * bounds[i])
}

fn retry<T, R: Rng>(rng: &mut R, what: &str, mut f: impl FnMut(&mut R) -> Option<T>) -> Result<T, SimError> {
    for _ in 0..MAX_TRIES {
        if let Some(x) = f(rng) {
            return Ok(x);
        }
    }
    Err(SimError::PlacementFailure(what.to_string()))
}

fn plane_ok(n: &Vector3<f64>, d: f64, poses: &[Pose], others: &[CpPlane]) -> bool {
    if n.z.abs() > 0.8 || d < MIN_PLANE_CLEARANCE {
        return false;
    }
    let clear = poses.iter().all(|ps| (d - n.dot(&ps.p)).abs() >= MIN_PLANE_CLEARANCE && (ps.rot() * n).z.abs() <= 0.9);
    let distinct = others.iter().all(|o| o.normal().dot(n).abs() <= 10f64.to_radians().cos());
    let spread = match others {
        [a, b, ..] => a.normal().cross(&b.normal()).dot(n).abs() >= 0.1,
        _ => true,
    };
    clear && distinct && spread
}

/// Places features uniformly in the workspace so that every point and line
/// end point is visible from all `poses`, planes keep clear of the sensor
/// path, and the constraint flags hold exactly.
pub fn sample_scene<R: Rng>(spec: &FeatureSceneSpec, poses: &[Pose], rng: &mut R) -> Result<Scene, SimError> {
    spec.validate()?;
    let mut scene = Scene::default();
    for _ in 0..spec.planes {
        let pl = retry(rng, "plane", |rng| {
            let mut n = unit(rng);
            let mut d = n.dot(&uniform_in(rng, &spec.bounds));
            if d < 0.0 {
                n = -n;
                d = -d;
            }
            plane_ok(&n, d, poses, &scene.planes).then(|| CpPlane { pi: d * n })
        })?;
        scene.planes.push(pl);
    }
    for _ in 0..spec.points {
        let p = retry(rng, "point", |rng| {
            let p = uniform_in(rng, &spec.bounds);
            visible_from_all(&p, poses).then_some(p)
        })?;
        scene.points.push(p);
    }
    let shared = if spec.parallel_lines { Some(line_direction(rng, spec, &scene.planes)) } else { None };
    for _ in 0..spec.lines {
        let seg = retry(rng, "line", |rng| {
            let dir = shared.unwrap_or_else(|| line_direction(rng, spec, &scene.planes));
            if !spec.parallel_lines {
                let min_cos = MIN_LINE_ANGLE_DEG.to_radians().cos();
                if scene.lines.iter().any(|s| s.direction().dot(&dir).abs() > min_cos) {
                    return None;
                }
                if !spec.line_parallel_plane && scene.planes.iter().any(|pl| pl.normal().dot(&dir).abs() < 10f64.to_radians().sin()) {
                    return None;
                }
            }
            let a = uniform_in(rng, &spec.bounds);
            let b = a + rng.random_range(1.0..3.0) * dir;
            let seg = Segment { a, b };
            let ok = inside(&b, &spec.bounds) && visible_from_all(&a, poses) && visible_from_all(&b, poses) && seg.plucker().n.norm() > 0.5;
            ok.then_some(seg)
        })?;
        scene.lines.push(seg);
    }
    Ok(scene)
}

fn line_direction<R: Rng>(rng: &mut R, spec: &FeatureSceneSpec, planes: &[CpPlane]) -> Vector3<f64> {
    let v = unit(rng);
    if !spec.line_parallel_plane {
        return v;
    }
    let n = planes[0].normal();
    let w = v - n * n.dot(&v);
    if w.norm() < 1e-3 {
        return line_direction(rng, spec, planes);
    }
    let w = w.normalize();
    // remove the residual normal component left by rounding
    (w - n * n.dot(&w)).normalize()
}
