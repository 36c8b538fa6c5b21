use ains_estimators::{predict, Observation, SensorNoise, StateFeature};
use ains_measurement::PointSensorModel;
use ains_sim::*;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setup(duration: f64, counts: (usize, usize, usize), seed: u64) -> (Trajectory, Scene) {
    let traj = generate_trajectory(&TrajectorySpec { duration, ..TrajectorySpec::default() }).unwrap();
    let poses: Vec<_> = traj.cam_states().iter().map(|s| s.pose()).collect();
    let scene =
        sample_scene(&FeatureSceneSpec::counts(counts.0, counts.1, counts.2), &poses, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    (traj, scene)
}

fn residuals(data: &SimData, scene: &Scene, spec: &MeasurementSpec) -> Vec<Vec<f64>> {
    let feats = scene_features(scene, spec.plane_form).unwrap();
    let mut out = Vec::new();
    for fr in &data.frames {
        let pose = data.truth[fr.idx].state.pose();
        for (id, o) in &fr.obs {
            let (r, _, _) = predict(o, &pose, &feats[*id], &pose, &feats[*id], &spec.sensor).unwrap();
            out.push(r.iter().copied().collect());
        }
    }
    out
}

#[test]
fn zero_noise_measurements_have_zero_residual() {
    let (traj, scene) = setup(5.0, (4, 3, 2), 1);
    for plane_form in [PlaneForm::ClosestPoint, PlaneForm::Hesse] {
        for point_model in [PointSensorModel::MonoBearing, PointSensorModel::RangeBearing] {
            let spec = MeasurementSpec { point_model, plane_form, ..MeasurementSpec::default() }.scaled(0.0);
            let data = simulate_measurements(&traj, &scene, &spec, 3).unwrap();
            assert_eq!(data.frames.len(), traj.cam_idx.len());
            assert!(data.frames.iter().all(|f| f.obs.len() == 9));
            let worst = residuals(&data, &scene, &spec).iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(worst < 1e-12, "{worst}");
            for (a, b) in data.samples.iter().zip(&data.truth) {
                assert_eq!((a.omega, a.accel), (b.sample.omega, b.sample.accel));
            }
        }
    }
}

fn bearing_std(spec: &MeasurementSpec, seed: u64) -> f64 {
    let (traj, scene) = setup(30.0, (20, 0, 0), 2);
    let data = simulate_measurements(&traj, &scene, spec, seed).unwrap();
    let r: Vec<f64> = residuals(&data, &scene, spec).into_iter().flatten().collect();
    assert!(r.len() >= 10_000);
    (r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64).sqrt()
}

#[test]
fn doubling_noise_doubles_residual_spread() {
    let spec = MeasurementSpec::default();
    let one = bearing_std(&spec, 4);
    let two = bearing_std(&spec.scaled(2.0), 5);
    let expected = spec.sensor.sigma_px / spec.sensor.intrinsics.f1;
    assert!((one / expected - 1.0).abs() < 0.05, "{one} vs {expected}");
    assert!((two / one / 2.0 - 1.0).abs() < 0.05, "{}", two / one);
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let (traj, scene) = setup(3.0, (3, 2, 1), 3);
    let spec = MeasurementSpec::default();
    let a = simulate_measurements(&traj, &scene, &spec, 9).unwrap();
    assert_eq!(a, simulate_measurements(&traj, &scene, &spec, 9).unwrap());
    assert_ne!(a, simulate_measurements(&traj, &scene, &spec, 10).unwrap());
}

#[test]
fn bias_walk_matches_its_density() {
    let (traj, scene) = setup(30.0, (1, 0, 0), 4);
    let spec = MeasurementSpec::default();
    let mut acc = 0.0;
    let n = 20;
    for seed in 0..n {
        let data = simulate_measurements(&traj, &scene, &spec, seed).unwrap();
        let (b0, b1) = (data.truth[0].state.bg, data.truth.last().unwrap().state.bg);
        acc += (b1 - b0).norm_squared();
    }
    let expected = 3.0 * spec.imu.sigma_wg.powi(2) * 30.0;
    let ratio = acc / n as f64 / expected;
    assert!((0.5..1.6).contains(&ratio), "{ratio}");
}

#[test]
fn features_follow_filter_order() {
    let (_, scene) = setup(2.0, (2, 1, 1), 5);
    let f = scene_features(&scene, PlaneForm::Hesse).unwrap();
    assert!(matches!(f[..], [StateFeature::Point(_), StateFeature::Point(_), StateFeature::Line(_), StateFeature::HessePlane(_)]));
    let like = Observation::Point { model: PointSensorModel::MonoBearing, z: DVector::zeros(2) };
    assert_eq!(SensorNoise::default().sigmas(&like).len(), 2);
}

fn noise_free(filter: FilterKind, counts: (usize, usize, usize)) -> McConfig {
    McConfig {
        trajectory: TrajectorySpec { duration: 10.0, ..TrajectorySpec::default() },
        scene: FeatureSceneSpec::counts(counts.0, counts.1, counts.2),
        filter,
        data_noise_scale: 0.0,
        initial_error: false,
        runs: 1,
        ..McConfig::default()
    }
}

#[test]
fn noise_free_ideal_run_has_zero_error() {
    for (filter, counts) in [(FilterKind::EkfSlam, (4, 2, 2)), (FilterKind::msckf(), (12, 0, 0))] {
        let r = run_monte_carlo(&noise_free(filter, counts), Some(1)).unwrap();
        assert_eq!(r.times.len(), 101);
        let worst = r.ideal.ori_rmse_deg.iter().chain(&r.ideal.pos_rmse_m).fold(0.0f64, |m, x| m.max(*x));
        assert!(worst < 1e-6, "{filter:?}: {worst}");
    }
}

#[test]
fn monte_carlo_is_deterministic_across_thread_counts() {
    let cfg = McConfig { trajectory: TrajectorySpec { duration: 3.0, ..TrajectorySpec::default() }, runs: 4, ..McConfig::default() };
    let a = run_monte_carlo(&cfg, Some(1)).unwrap();
    let b = run_monte_carlo(&cfg, Some(3)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.runs, 4);
    assert_eq!(a.seeds, (0..4).map(|r| run_seed(cfg.seed, r)).collect::<Vec<_>>());
    assert!(a.ideal.ori_nees.iter().chain(&a.standard.pos_nees).all(|x| *x >= 0.0));
    let c = run_monte_carlo(&McConfig { seed: 2, ..cfg }, Some(1)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        McConfig { runs: 0, ..McConfig::default() },
        McConfig { data_noise_scale: -1.0, ..McConfig::default() },
        McConfig { filter: FilterKind::msckf(), scene: FeatureSceneSpec::counts(5, 1, 0), ..McConfig::default() },
        McConfig { filter: FilterKind::Msckf { window: 2 }, ..McConfig::default() },
    ];
    for c in bad {
        assert!(matches!(run_monte_carlo(&c, Some(1)), Err(SimError::InvalidSpec(_))));
    }
}

#[test]
fn nees_interval_matches_chi_square_table() {
    let (lo, hi) = nees_interval(3, 50);
    assert!((lo - 2.36).abs() < 5e-3 && (hi - 3.72).abs() < 5e-3, "{lo} {hi}");
    // chi-square(30) 2.5% and 97.5% quantiles are 16.791 and 46.979
    let (lo, hi) = nees_interval(3, 10);
    assert!((lo * 10.0 - 16.791).abs() < 0.1 && (hi * 10.0 - 46.979).abs() < 0.1, "{lo} {hi}");
}
