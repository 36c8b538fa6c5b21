use ains_geometry::{perp_basis, skew};
use ains_propagation::{gravity, TrajPoint, IMU_DIM};
use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::matrix::{feature_offsets, LineModel, ObsFeature};
use crate::ObsError;

const PARALLEL_TOL: f64 = 1e-9;

/// Feature/sensor/motion configurations with a known unobservable subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NullCase {
    Points,
    SingleLine,
    /// Two or more lines, not all parallel.
    Lines,
    SinglePlane,
    /// Two or more planes with non-parallel normals.
    Planes,
    PointLine,
    PointPlane,
    LinePlane {
        parallel: bool,
    },
    PointLinePlane,
    /// Global `x` position alongside the features.
    GlobalX,
    GlobalY,
    GlobalZ,
    /// Known global direction seen in the body frame; must not be vertical.
    GlobalOrientation(Vector3<f64>),
    /// Global `x`, `y` and `z` position.
    GlobalPosition,
    PureTranslation,
    /// Constant body-frame acceleration and a fixed rotation axis.
    ConstantAccel,
    /// Rotation about a fixed position: point depths plus, per line, the
    /// in-plane offset and direction (projective) or the rotation about
    /// its own direction through the sensor (direct).
    PureRotation,
    /// Motion along the ray to point feature `feature`.
    TowardPoint {
        feature: usize,
    },
    /// Motion along the axis through the origin parallel to line feature
    /// `feature`; same extra line directions as [`NullCase::PureRotation`].
    ParallelToLine {
        feature: usize,
    },
}

/// Basis of the unobservable subspace, one direction per column.
#[derive(Debug, Clone, PartialEq)]
pub struct NullBasis {
    pub n: DMatrix<f64>,
    pub label: &'static str,
}

fn mismatch<T>(msg: &str) -> Result<T, ObsError> {
    Err(ObsError::CaseMismatch(msg.to_string()))
}

fn put(m: &mut DMatrix<f64>, r: usize, c: usize, b: &Matrix3<f64>) {
    m.fixed_view_mut::<3, 3>(r, c).copy_from(b);
}

fn put_vec(m: &mut DMatrix<f64>, r: usize, c: usize, v: &Vector3<f64>) {
    m.fixed_view_mut::<3, 1>(r, c).copy_from(v);
}

struct Ctx<'a> {
    x1: &'a TrajPoint,
    features: &'a [ObsFeature],
    offsets: Vec<usize>,
    n: usize,
}

impl Ctx<'_> {
    fn r1(&self) -> Matrix3<f64> {
        self.x1.state.q.rot()
    }

    fn zeros(&self, cols: usize) -> DMatrix<f64> {
        DMatrix::zeros(self.n, cols)
    }

    /// Global rotation about gravity.
    fn rotation(&self) -> DMatrix<f64> {
        let g = gravity();
        let s = &self.x1.state;
        let mut m = self.zeros(1);
        put_vec(&mut m, 0, 0, &(self.r1() * g));
        put_vec(&mut m, 6, 0, &(-s.v.cross(&g)));
        put_vec(&mut m, 12, 0, &(-s.p.cross(&g)));
        for (f, &o) in self.features.iter().zip(&self.offsets) {
            match f {
                ObsFeature::Point { p, .. } => put_vec(&mut m, o, 0, &(-p.cross(&g))),
                ObsFeature::SphericalPoint { .. } => m[(o + 1, 0)] = -g.norm(),
                ObsFeature::Line { .. } => put_vec(&mut m, o, 0, &(-g)),
                ObsFeature::CpPlane(pl) => put_vec(&mut m, o, 0, &(-pl.pi.cross(&g))),
                ObsFeature::HessePlane(_) => m[(o, 0)] = -g.norm(),
            }
        }
        m
    }

    /// Global translation, one column per axis.
    fn translation(&self) -> DMatrix<f64> {
        let mut m = self.zeros(3);
        put(&mut m, 12, 0, &Matrix3::identity());
        for (f, &o) in self.features.iter().zip(&self.offsets) {
            match f {
                ObsFeature::Point { .. } => put(&mut m, o, 0, &Matrix3::identity()),
                ObsFeature::SphericalPoint { s, .. } => put(&mut m, o, 0, &s.inverse_jacobian()),
                ObsFeature::Line { l, .. } => {
                    let ol = l.orthonormal();
                    let (ne, ve) = (l.n_unit(), l.v_unit());
                    put(&mut m, o, 0, &((ol.w2 / ol.w1) * ve * ne.transpose()));
                    let row = ol.eta * ol.eta * ol.w2 * ol.w2 * ne.cross(&ve).transpose();
                    m.view_mut((o + 3, 0), (1, 3)).copy_from(&row);
                }
                ObsFeature::CpPlane(pl) => {
                    let n = pl.normal();
                    put(&mut m, o, 0, &(n * n.transpose()));
                }
                ObsFeature::HessePlane(h) => m.view_mut((o + 2, 0), (1, 3)).copy_from(&h.n.transpose()),
            }
        }
        m
    }

    /// Arbitrary global rotation; valid when the attitude never changes.
    fn any_rotation(&self) -> Result<DMatrix<f64>, ObsError> {
        let s = &self.x1.state;
        let r = self.r1();
        let g = gravity();
        let mut m = self.zeros(3);
        put(&mut m, 0, 0, &r);
        put(&mut m, 6, 0, &(-skew(&s.v)));
        put(&mut m, 9, 0, &(r * skew(&g)));
        put(&mut m, 12, 0, &(-skew(&s.p)));
        for (f, &o) in self.features.iter().zip(&self.offsets) {
            match f {
                ObsFeature::Point { p, .. } => put(&mut m, o, 0, &(-skew(p))),
                ObsFeature::SphericalPoint { s, .. } => put(&mut m, o, 0, &(-s.inverse_jacobian() * skew(&s.to_euclidean()))),
                ObsFeature::Line { .. } => put(&mut m, o, 0, &(-Matrix3::identity())),
                ObsFeature::CpPlane(pl) => put(&mut m, o, 0, &(-skew(&pl.pi))),
                ObsFeature::HessePlane(h) => {
                    let (_, phi) = h.angles().map_err(ains_measurement::MeasError::from)?;
                    let nx = skew(&h.n);
                    let p1 = h.perp1().map_err(ains_measurement::MeasError::from)?;
                    let p2 = h.perp2().map_err(ains_measurement::MeasError::from)?;
                    m.view_mut((o, 0), (1, 3)).copy_from(&(-(p1.transpose() * nx) / phi.cos()));
                    m.view_mut((o + 1, 0), (1, 3)).copy_from(&(-(p2.transpose() * nx)));
                }
            }
        }
        Ok(m)
    }

    /// Uniform scaling of the scene about the origin.
    fn scale(&self) -> DMatrix<f64> {
        let s = &self.x1.state;
        let a_body = self.x1.sample.accel - s.ba + self.r1() * gravity();
        let mut m = self.zeros(1);
        put_vec(&mut m, 6, 0, &s.v);
        put_vec(&mut m, 9, 0, &(-a_body));
        put_vec(&mut m, 12, 0, &s.p);
        for (f, &o) in self.features.iter().zip(&self.offsets) {
            match f {
                ObsFeature::Point { p, .. } => put_vec(&mut m, o, 0, p),
                ObsFeature::SphericalPoint { s, .. } => m[(o, 0)] = s.r,
                ObsFeature::Line { l, .. } => {
                    let ol = l.orthonormal();
                    m[(o + 3, 0)] = -ol.w1 * ol.w2 * ol.eta * ol.eta;
                }
                ObsFeature::CpPlane(pl) => put_vec(&mut m, o, 0, &pl.pi),
                ObsFeature::HessePlane(h) => m[(o + 2, 0)] = h.d,
            }
        }
        m
    }

    /// Moves point `i` along the ray from the first camera position.
    fn point_depth(&self, i: usize) -> Result<DMatrix<f64>, ObsError> {
        let o = self.offsets[i];
        let mut m = self.zeros(1);
        match &self.features[i] {
            ObsFeature::Point { p, .. } => put_vec(&mut m, o, 0, &(p - self.x1.state.p).normalize()),
            ObsFeature::SphericalPoint { s, .. } => {
                let b = (s.to_euclidean() - self.x1.state.p).normalize();
                put_vec(&mut m, o, 0, &(s.inverse_jacobian() * b));
            }
            _ => return mismatch("feature is not a point"),
        }
        Ok(m)
    }

    /// Moves line `i` within the plane through it and the origin.
    fn line_depth(&self, i: usize) -> Result<DMatrix<f64>, ObsError> {
        let ObsFeature::Line { l, .. } = &self.features[i] else {
            return mismatch("feature is not a line");
        };
        if l.n_unit().dot(&self.x1.state.p).abs() > PARALLEL_TOL * (1.0 + self.x1.state.p.norm()) {
            return mismatch("camera is not in the plane of the line and the origin");
        }
        let mut m = self.zeros(1);
        m[(self.offsets[i] + 3, 0)] = 1.0;
        Ok(m)
    }

    /// Line `i` directions unobservable when the sensor stays on the plane
    /// through the line and the origin (projective model: only that plane
    /// is seen) or on the axis through the origin parallel to the line
    /// (direct model: only direction and distance are seen).
    fn line_fixed_center(&self, i: usize) -> Result<DMatrix<f64>, ObsError> {
        let ObsFeature::Line { l, model } = &self.features[i] else {
            return mismatch("feature is not a line");
        };
        let o = self.offsets[i];
        Ok(match model {
            LineModel::Projective(_) => {
                let mut m = self.line_depth(i)?.resize_horizontally(2, 0.0);
                put_vec(&mut m, o, 1, &l.n_unit());
                m
            }
            LineModel::Direct => {
                let p = self.x1.state.p;
                if p.cross(&l.v_unit()).norm() > PARALLEL_TOL * (1.0 + p.norm()) {
                    return mismatch("sensor is off the axis parallel to the line");
                }
                let mut m = self.zeros(1);
                put_vec(&mut m, o, 0, &l.v_unit());
                m
            }
        })
    }

    /// Velocity along `d`.
    fn velocity(&self, d: &Vector3<f64>) -> DMatrix<f64> {
        let mut m = self.zeros(1);
        put_vec(&mut m, 6, 0, d);
        m
    }

    fn lines(&self) -> Vec<ains_geometry::PluckerLine> {
        self.features.iter().filter_map(|f| if let ObsFeature::Line { l, .. } = f { Some(*l) } else { None }).collect()
    }

    fn plane_normals(&self) -> Vec<Vector3<f64>> {
        self.features
            .iter()
            .filter_map(|f| match f {
                ObsFeature::CpPlane(p) => Some(p.normal()),
                ObsFeature::HessePlane(h) => Some(h.n),
                _ => None,
            })
            .collect()
    }

    fn count(&self) -> (usize, usize, usize) {
        let c = |f: fn(&ObsFeature) -> bool| self.features.iter().filter(|x| f(x)).count();
        (c(ObsFeature::is_point), c(ObsFeature::is_line), c(ObsFeature::is_plane))
    }
}

fn hcat(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks[0].nrows();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut m = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        m.columns_mut(c, b.ncols()).copy_from(b);
        c += b.ncols();
    }
    m
}

fn parallel(a: &Vector3<f64>, b: &Vector3<f64>) -> bool {
    a.normalize().cross(&b.normalize()).norm() < PARALLEL_TOL.sqrt()
}

fn orthogonal(a: &Vector3<f64>, b: &Vector3<f64>) -> bool {
    a.normalize().dot(&b.normalize()).abs() < PARALLEL_TOL.sqrt()
}

fn frame(c: [Vector3<f64>; 3]) -> Matrix3<f64> {
    Matrix3::from_columns(&c)
}

fn line_frame(l: &ains_geometry::PluckerLine) -> Matrix3<f64> {
    l.orthonormal().r_l
}

fn plane_frame(n: &Vector3<f64>) -> Matrix3<f64> {
    let (a, b) = perp_basis(n);
    frame([a, b, n.normalize()])
}

/// Rank of a set of directions.
fn direction_rank(d: &[Vector3<f64>]) -> usize {
    if d.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(3, d.len(), |i, j| d[j].normalize()[i]);
    m.svd(false, false).singular_values.iter().filter(|&&s| s > PARALLEL_TOL.sqrt()).count()
}

/// Analytic unobservable directions at the reference state `x1` for the
/// configuration `case` with `features` in the state.
pub fn analytic_nullspace(case: &NullCase, x1: &TrajPoint, features: &[ObsFeature]) -> Result<NullBasis, ObsError> {
    let ctx = Ctx { x1, features, offsets: feature_offsets(features), n: IMU_DIM + features.iter().map(|f| f.dim()).sum::<usize>() };
    let (np, nl, ns) = ctx.count();
    let rot = ctx.rotation();
    let trans = ctx.translation();
    let gauge = |f: &Matrix3<f64>| hcat(&[rot.clone(), &trans * DMatrix::from_column_slice(3, 3, f.as_slice())]);
    let eye = Matrix3::identity();
    let lines = ctx.lines();
    let normals = ctx.plane_normals();
    let require = |ok: bool, msg: &str| if ok { Ok(()) } else { mismatch(msg) };

    let (n, label) = match *case {
        NullCase::Points => {
            require(np > 0 && nl == 0 && ns == 0, "expected points only")?;
            (gauge(&eye), "points")
        }
        NullCase::SingleLine => {
            require(nl == 1 && np == 0 && ns == 0, "expected exactly one line")?;
            let l = lines[0];
            (hcat(&[gauge(&line_frame(&l)), ctx.velocity(&l.v_unit())]), "single_line")
        }
        NullCase::Lines => {
            require(nl >= 2 && np == 0 && ns == 0, "expected two or more lines only")?;
            let dirs: Vec<_> = lines.iter().map(|l| l.v).collect();
            require(direction_rank(&dirs) >= 2, "all lines are parallel")?;
            (gauge(&line_frame(&lines[0])), "lines")
        }
        NullCase::SinglePlane => {
            require(ns == 1 && np == 0 && nl == 0, "expected exactly one plane")?;
            let nn = normals[0];
            let (a, b) = perp_basis(&nn);
            let mut turn = ctx.zeros(1);
            put_vec(&mut turn, 0, 0, &(ctx.r1() * nn));
            (hcat(&[gauge(&plane_frame(&nn)), ctx.velocity(&a), ctx.velocity(&b), turn]), "single_plane")
        }
        NullCase::Planes => {
            require(ns >= 2 && np == 0 && nl == 0, "expected two or more planes only")?;
            let f = gauge(&plane_frame(&normals[0]));
            match direction_rank(&normals) {
                1 => return mismatch("all planes are parallel"),
                2 => {
                    let j = (1..normals.len()).find(|&j| !parallel(&normals[0], &normals[j])).expect("rank two");
                    (hcat(&[f, ctx.velocity(&normals[0].cross(&normals[j]).normalize())]), "two_planes")
                }
                _ => (f, "planes"),
            }
        }
        NullCase::PointLine => {
            require(np > 0 && nl > 0 && ns == 0, "expected points and lines")?;
            (gauge(&eye), "point_line")
        }
        NullCase::PointPlane => {
            require(np > 0 && ns > 0 && nl == 0, "expected points and planes")?;
            (gauge(&eye), "point_plane")
        }
        NullCase::PointLinePlane => {
            require(np > 0 && nl > 0 && ns > 0, "expected points, lines and planes")?;
            (gauge(&eye), "point_line_plane")
        }
        NullCase::LinePlane { parallel: par } => {
            require(nl > 0 && ns > 0 && np == 0, "expected lines and planes")?;
            let v0 = lines[0].v;
            let all_par = lines.iter().all(|l| parallel(&l.v, &v0)) && normals.iter().all(|n| orthogonal(n, &v0));
            require(par == all_par, if par { "lines are not parallel to the planes" } else { "lines are parallel to the planes" })?;
            if par {
                (hcat(&[gauge(&line_frame(&lines[0])), ctx.velocity(&v0.normalize())]), "line_parallel_plane")
            } else {
                (gauge(&line_frame(&lines[0])), "line_plane")
            }
        }
        NullCase::GlobalX => (&trans * DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]), "global_x"),
        NullCase::GlobalY => (&trans * DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]), "global_y"),
        NullCase::GlobalZ => {
            let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
            (hcat(&[rot, &trans * a]), "global_z")
        }
        NullCase::GlobalOrientation(d) => {
            require(!parallel(&d, &gravity()), "known direction is vertical")?;
            (trans, "global_orientation")
        }
        NullCase::GlobalPosition => (ctx.zeros(0), "global_position"),
        NullCase::PureTranslation => (hcat(&[ctx.any_rotation()?, trans]), "pure_translation"),
        NullCase::ConstantAccel => (hcat(&[gauge(&eye), ctx.scale()]), "constant_accel"),
        NullCase::PureRotation => {
            require(ns == 0 && np + nl > 0, "expected points and lines only")?;
            let mut cols = vec![gauge(&eye)];
            for (i, f) in features.iter().enumerate() {
                cols.push(if f.is_point() { ctx.point_depth(i)? } else { ctx.line_fixed_center(i)? });
            }
            (hcat(&cols), "pure_rotation")
        }
        NullCase::TowardPoint { feature } => {
            require(ns == 0 && feature < features.len(), "expected points and lines only")?;
            (hcat(&[gauge(&eye), ctx.point_depth(feature)?]), "toward_point")
        }
        NullCase::ParallelToLine { feature } => {
            require(ns == 0 && feature < features.len(), "expected points and lines only")?;
            (hcat(&[gauge(&eye), ctx.line_fixed_center(feature)?]), "parallel_to_line")
        }
    };
    Ok(NullBasis { n, label })
}
