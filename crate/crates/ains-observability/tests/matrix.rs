mod common;

use ains_measurement::{FeatureJacobian, GlobalMeasModel, PointSensorModel};
use ains_observability::*;
use ains_sim::{FeatureSceneSpec, Motion};
use common::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn bookkeeping() {
    let s = Setup::new(Motion::Sinusoid3D, FeatureSceneSpec::counts(1, 0, 0), 1);
    let f = vec![ObsFeature::Point { p: s.scene.points[0], model: PointSensorModel::RangeBearing }];
    let epochs: Vec<usize> = s.traj.cam_idx[..20].to_vec();
    let om = build_observability_matrix(&s.traj.points, &epochs, &f, &[]).unwrap();
    assert_eq!((om.m.nrows(), om.m.ncols()), (60, 18));
    assert_eq!(om.blocks.len(), 20);
    assert!(om.rows.iter().all(|r| r.source == RowSource::Feature(0)));
    assert_eq!(om.rows[59].epoch, 19);

    let f: Vec<ObsFeature> = s.features_with(Variant::Spherical);
    let g = [GlobalMeasModel::PosZ];
    let om = build_observability_matrix(&s.traj.points, &epochs, &f, &g).unwrap();
    assert_eq!((om.m.nrows(), om.m.ncols()), (60, 18));
    assert_eq!(om.rows[2].source, RowSource::Global(0));

    assert_eq!(build_observability_matrix(&s.traj.points, &epochs[..1], &f, &[]), Err(ObsError::TooFewEpochs(1)));
}

#[test]
fn first_block_is_measurement_jacobian() {
    let s = Setup::new(Motion::Sinusoid3D, FeatureSceneSpec::counts(2, 1, 1), 2);
    let f = s.features();
    let om = s.matrix(&f, &[]);
    let pose = s.x1().state.pose();
    let mut col = 15;
    let mut row = 0;
    for feat in &f {
        let j: FeatureJacobian = feat.jacobian(&pose).unwrap();
        let h = j.embed(om.cols(), Some(col));
        assert!((om.m.rows(row, h.nrows()) - &h).norm() < 1e-12 * h.norm());
        row += h.nrows();
        col += feat.dim();
    }
    assert_eq!(om.blocks[0], 0..row);
}

#[test]
fn random_directions_are_observable() {
    let s = Setup::new(Motion::Sinusoid3D, FeatureSceneSpec::counts(3, 2, 1), 3);
    let om = s.matrix(&s.features(), &[]);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let n = DMatrix::from_fn(om.cols(), 1, |_, _| rng.random_range(-1.0..1.0));
        assert!(verify_nullspace(&om.m, &n).unwrap() > 1e-4);
    }
    let bad = DMatrix::zeros(om.cols() + 1, 1);
    assert!(matches!(verify_nullspace(&om.m, &bad), Err(ObsError::DimensionMismatch(..))));
    assert_eq!(verify_nullspace(&om.m, &DMatrix::zeros(om.cols(), 0)).unwrap(), 0.0);
}

#[test]
fn numeric_nullspace_of_known_matrix() {
    let m = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
    let (dim, basis) = numeric_nullspace(&m, DEFAULT_REL_TOL);
    assert_eq!(dim, 2);
    assert!((&m * &basis).norm() < 1e-14);
    assert!((basis.transpose() * &basis - DMatrix::<f64>::identity(2, 2)).norm() < 1e-12);
    let tall = DMatrix::from_fn(10, 3, |i, j| ((i + 1) * (j + 2)) as f64);
    assert_eq!(numeric_nullspace(&tall, DEFAULT_REL_TOL).0, 2);
}

#[test]
fn rank_over_time_is_monotone() {
    let c = FeatureSceneSpec::counts;
    for (scene, last) in [(c(5, 0, 0), 4), (c(0, 1, 0), 5), (c(0, 0, 1), 7)] {
        let s = Setup::new(Motion::Sinusoid3D, scene, 11);
        let om = s.matrix(&s.features(), &[]);
        let dims = rank_over_time(&om, DEFAULT_REL_TOL);
        assert_eq!(dims.len(), om.blocks.len());
        assert!(dims.windows(2).all(|w| w[1].1 <= w[0].1), "{dims:?}");
        assert_eq!(dims.last().unwrap().1, last);
        assert_eq!(dims.last().unwrap().1, numeric_nullspace(&om.m, DEFAULT_REL_TOL).0);
        assert!(dims[0].1 > last);
    }
}

fn offsets(f: &[ObsFeature]) -> Vec<usize> {
    f.iter()
        .scan(15, |c, x| {
            let at = *c;
            *c += x.dim();
            Some(at)
        })
        .collect()
}

#[test]
fn spherical_rotation_block_has_no_range_factor() {
    let s = Setup::new(Motion::PureTranslation, FeatureSceneSpec::counts(1, 1, 0), 3);
    let f = s.features_with(Variant::Spherical);
    let m = s.matrix(&f, &[]).m;
    let n = analytic_nullspace(&NullCase::PureTranslation, s.x1(), &f).unwrap().n;
    let ObsFeature::SphericalPoint { s: sp, .. } = f[0] else { unreachable!() };
    let mut scaled = n.clone();
    let o = offsets(&f)[0];
    for c in 0..3 {
        scaled[(o + c, 0)] *= sp.r;
    }
    let good = verify_nullspace(&m, &n).unwrap();
    let bad = verify_nullspace(&m, &scaled).unwrap();
    assert!(good < 1e-8 && bad > 1e4 * good, "{good} {bad}");
}

#[test]
fn line_scale_entry_uses_orthonormal_weights() {
    let s = Setup::new(Motion::ConstantLocalAccel { a_body: vec3(0.02, -0.01, 0.05) }, FeatureSceneSpec::counts(1, 1, 0), 3);
    let f = s.features();
    let m = s.matrix(&f, &[]).m;
    let n = analytic_nullspace(&NullCase::ConstantAccel, s.x1(), &f).unwrap().n;
    let ObsFeature::Line { l, .. } = f[1] else { unreachable!() };
    let ol = l.orthonormal();
    let mut alt = n.clone();
    alt[(offsets(&f)[1] + 3, 4)] = -ol.w2 / ol.w1;
    let good = verify_nullspace(&m, &n).unwrap();
    let bad = verify_nullspace(&m, &alt).unwrap();
    assert!(good < 1e-8 && bad > 1e4 * good, "{good} {bad}");
}

#[test]
fn global_y_keeps_x_translation_observable() {
    let s = Setup::new(Motion::Sinusoid3D, FeatureSceneSpec::counts(4, 0, 0), 7);
    let f = s.features();
    let n_y = analytic_nullspace(&NullCase::GlobalY, s.x1(), &f).unwrap().n;
    let good = verify_nullspace(&s.matrix(&f, &[GlobalMeasModel::PosY]).m, &n_y).unwrap();
    let bad = verify_nullspace(&s.matrix(&f, &[GlobalMeasModel::PosX]).m, &n_y).unwrap();
    assert!(good < 1e-8 && bad > 1e4 * good, "{good} {bad}");
}

#[test]
fn two_planes_extra_direction_is_normal_cross_product() {
    let s = Setup::new(Motion::Sinusoid3D, FeatureSceneSpec::counts(0, 0, 2), 104);
    let f = s.features();
    let m = s.matrix(&f, &[]).m;
    let n = analytic_nullspace(&NullCase::Planes, s.x1(), &f).unwrap().n;
    assert_eq!(n.ncols(), 5);
    let ObsFeature::CpPlane(p1) = f[0] else { unreachable!() };
    let (perp, _) = ains_geometry::perp_basis(&p1.normal());
    let mut alt = n.clone();
    alt.fixed_view_mut::<3, 1>(6, 4).copy_from(&perp);
    let good = verify_nullspace(&m, &n).unwrap();
    let bad = verify_nullspace(&m, &alt).unwrap();
    assert!(good < 1e-8 && bad > 1e4 * good, "{good} {bad}");
}

#[test]
fn translation_only_bias_block_sign() {
    let s = Setup::new(Motion::PureTranslation, FeatureSceneSpec::counts(1, 1, 0), 3);
    let f = s.features();
    let m = s.matrix(&f, &[]).m;
    let n = analytic_nullspace(&NullCase::PureTranslation, s.x1(), &f).unwrap().n;
    let mut alt = n.clone();
    let flipped = -alt.view((9, 0), (3, 3)).into_owned();
    alt.view_mut((9, 0), (3, 3)).copy_from(&flipped);
    let good = verify_nullspace(&m, &n).unwrap();
    let bad = verify_nullspace(&m, &alt).unwrap();
    assert!(good < 1e-8 && bad > 1e4 * good, "{good} {bad}");
}
