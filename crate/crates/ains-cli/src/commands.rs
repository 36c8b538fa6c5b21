use std::path::Path;

use ains_estimators::Observation;
use ains_sim::{generate_trajectory, nees_interval, run_monte_carlo, sample_scene, simulate_measurements, FilterKind, ModeReport};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::scenarios::{all_cases, case_by_name, degenerate_cases, evaluate_case, evaluate_degenerate, ObsSetup, SensorChoice};
use crate::CliError;

/// One line of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub case: String,
    pub value: f64,
    /// Number, `[low, high]` interval, or `null` for informational rows.
    pub threshold: Value,
    pub pass: bool,
}

impl SummaryRow {
    pub fn info(case: impl Into<String>, value: f64) -> Self {
        Self { case: case.into(), value, threshold: Value::Null, pass: true }
    }

    pub fn below(case: impl Into<String>, value: f64, tol: f64) -> Self {
        Self { case: case.into(), value, threshold: json!(tol), pass: value < tol }
    }

    pub fn equal(case: impl Into<String>, value: usize, expected: usize) -> Self {
        Self { case: case.into(), value: value as f64, threshold: json!(expected), pass: value == expected }
    }
}

pub fn all_pass(rows: &[SummaryRow]) -> bool {
    rows.iter().all(|r| r.pass)
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(out: &Path, rows: &[SummaryRow]) -> Result<(), CliError> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("summary.json"), serde_json::to_string_pretty(rows)? + "\n")?;
    Ok(())
}

/// `rank_over_time.csv` for the configured scene and
/// `nullspace_residuals.csv` for the requested cases.
pub fn cmd_observability(cfg: &RunConfig, out: &Path, tol: f64) -> Result<Vec<SummaryRow>, CliError> {
    let o = &cfg.observability;
    let traj = cfg.trajectory.spec();
    let sensors = SensorChoice::from_config(&cfg.sensors);
    let setup = ObsSetup::new(&traj, &cfg.scene.spec(), cfg.seed, o.stride)?;
    let features = setup.features(&sensors)?;
    let ranks = setup.rank_over_time(&features, tol)?;
    write_csv(&out.join("rank_over_time.csv"), &["t", "null_dim"], ranks.iter().map(|(t, d)| vec![num(*t), d.to_string()]))?;
    let mut rows = vec![SummaryRow::info("configured_scene/final_null_dim", ranks.last().map_or(f64::NAN, |r| r.1 as f64))];

    let cases = if o.cases.is_empty() {
        all_cases()
    } else {
        o.cases.iter().map(|n| case_by_name(n).ok_or_else(|| CliError::Config(format!("unknown case `{n}`")))).collect::<Result<_, _>>()?
    };
    let mut csv_rows = Vec::new();
    for (i, c) in cases.iter().enumerate() {
        let r = evaluate_case(c, &traj, &sensors, cfg.seed.wrapping_add(i as u64), o.stride, tol)?;
        csv_rows.push(vec![r.name.clone(), num(r.residual), (r.residual < tol).to_string()]);
        rows.push(SummaryRow::below(format!("{}/residual", r.name), r.residual, tol));
        rows.push(SummaryRow::equal(format!("{}/null_dim", r.name), r.dim, r.expected_dim));
    }
    write_csv(&out.join("nullspace_residuals.csv"), &["case", "residual", "pass"], csv_rows)?;
    write_summary(out, &rows)?;
    Ok(rows)
}

/// `degenerate.csv` with the null dimension of each degenerate motion
/// against the generic baseline.
pub fn cmd_degenerate(cfg: &RunConfig, out: &Path, tol: f64) -> Result<Vec<SummaryRow>, CliError> {
    let t = &cfg.trajectory;
    let sensors = SensorChoice::from_config(&cfg.sensors);
    let base = t.spec();
    let mut rows = Vec::new();
    let mut csv_rows = Vec::new();
    for (i, d) in degenerate_cases(t.a_body.into(), t.target.into(), t.direction.into()).iter().enumerate() {
        let r = evaluate_degenerate(d, &base, &sensors, cfg.seed.wrapping_add(i as u64), cfg.observability.stride, tol)?;
        csv_rows.push(vec![r.name.clone(), r.base_dim.to_string(), r.degen_dim.to_string(), num(r.residual)]);
        rows.push(SummaryRow::below(format!("{}/residual", r.name), r.residual, tol));
        rows.push(SummaryRow {
            case: format!("{}/extra_dims", r.name),
            value: r.degen_dim as f64 - r.base_dim as f64,
            threshold: json!(r.expected.describe()),
            pass: r.expected.holds(r.base_dim, r.degen_dim),
        });
    }
    write_csv(&out.join("degenerate.csv"), &["motion", "base_dim", "degen_dim", "residual"], csv_rows)?;
    write_summary(out, &rows)?;
    Ok(rows)
}

fn write_mode(dir: &Path, times: &[f64], m: &ModeReport) -> Result<(), CliError> {
    let rmse = times.iter().enumerate().map(|(k, t)| vec![num(*t), num(m.ori_rmse_deg[k]), num(m.pos_rmse_m[k])]);
    write_csv(&dir.join("rmse.csv"), &["t", "ori_rmse_deg", "pos_rmse_m"], rmse)?;
    let nees = times.iter().enumerate().map(|(k, t)| vec![num(*t), num(m.ori_nees[k]), num(m.pos_nees[k])]);
    write_csv(&dir.join("nees.csv"), &["t", "ori_nees", "pos_nees"], nees)
}

/// Monte-Carlo study of the configured filter: per-mode `rmse.csv` and
/// `nees.csv` under `standard/` and `ideal/`.
pub fn cmd_mc(cfg: &RunConfig, out: &Path, jobs: Option<usize>) -> Result<Vec<SummaryRow>, CliError> {
    let mc = cfg.mc_config();
    let r = run_monte_carlo(&mc, jobs)?;
    write_mode(&out.join("standard"), &r.times, &r.standard)?;
    write_mode(&out.join("ideal"), &r.times, &r.ideal)?;
    let last = r.times.len() - 1;
    let (lo, hi) = nees_interval(3, r.runs);
    let mut rows = vec![
        SummaryRow::info("standard/final_ori_rmse_deg", r.standard.ori_rmse_deg[last]),
        SummaryRow::info("ideal/final_ori_rmse_deg", r.ideal.ori_rmse_deg[last]),
        SummaryRow::info("standard/final_pos_rmse_m", r.standard.pos_rmse_m[last]),
        SummaryRow::info("ideal/final_pos_rmse_m", r.ideal.pos_rmse_m[last]),
        SummaryRow::info("standard/final_ori_nees", r.standard.ori_nees[last]),
        SummaryRow::info("standard/final_pos_nees", r.standard.pos_nees[last]),
        SummaryRow::info("ideal/final_pos_nees", r.ideal.pos_nees[last]),
    ];
    let ideal_ori = r.ideal.mean_ori_nees();
    rows.push(SummaryRow {
        case: "ideal/mean_ori_nees".into(),
        value: ideal_ori,
        threshold: json!([lo, hi]),
        pass: (lo..=hi).contains(&ideal_ori),
    });
    let (case, diff) = match mc.filter {
        FilterKind::EkfSlam => ("final_ori_nees_standard_minus_ideal", r.standard.ori_nees[last] - r.ideal.ori_nees[last]),
        FilterKind::Msckf { .. } => ("final_pos_nees_standard_minus_ideal", r.standard.pos_nees[last] - r.ideal.pos_nees[last]),
    };
    rows.push(SummaryRow { case: case.into(), value: diff, threshold: json!(0.0), pass: diff >= 0.0 });
    write_summary(out, &rows)?;
    Ok(rows)
}

fn obs_fields(o: &Observation) -> (&'static str, Vec<f64>) {
    match o {
        Observation::Point { z, .. } => ("point", z.iter().copied().collect()),
        Observation::Line(l) => ("line", vec![l.xs.x, l.xs.y, l.xe.x, l.xe.y]),
        Observation::CpPlane(z) => ("cp_plane", z.iter().copied().collect()),
        Observation::HessePlane(z) => ("hesse_plane", z.iter().copied().collect()),
    }
}

/// Raw truth, IMU readings and exteroceptive measurements of one run.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<Vec<SummaryRow>, CliError> {
    let traj = generate_trajectory(&cfg.trajectory.spec())?;
    let poses: Vec<_> = traj.cam_states().iter().map(|s| s.pose()).collect();
    let scene = sample_scene(&cfg.scene.spec(), &poses, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
    let spec = cfg.measurement().scaled(cfg.filter.data_noise_scale);
    let data = simulate_measurements(&traj, &scene, &spec, ains_sim::run_seed(cfg.seed, 0))?;

    let truth = data.truth.iter().map(|p| {
        let s = &p.state;
        let mut r = vec![num(p.t)];
        r.extend(
            [s.q.x, s.q.y, s.q.z, s.q.w].iter().chain(s.p.iter()).chain(s.v.iter()).chain(s.bg.iter()).chain(s.ba.iter()).map(|x| num(*x)),
        );
        r
    });
    let h = ["t", "qx", "qy", "qz", "qw", "px", "py", "pz", "vx", "vy", "vz", "bgx", "bgy", "bgz", "bax", "bay", "baz"];
    write_csv(&out.join("truth.csv"), &h, truth)?;
    let imu = data.samples.iter().map(|s| [s.t].iter().chain(s.omega.iter()).chain(s.accel.iter()).map(|x| num(*x)).collect());
    write_csv(&out.join("imu.csv"), &["t", "wx", "wy", "wz", "ax", "ay", "az"], imu)?;
    let mut meas = Vec::new();
    for fr in &data.frames {
        for (id, o) in &fr.obs {
            let (kind, z) = obs_fields(o);
            let mut r = vec![num(fr.t), id.to_string(), kind.to_string()];
            r.extend((0..4).map(|i| z.get(i).map_or(String::new(), |x| num(*x))));
            meas.push(r);
        }
    }
    let n_meas = meas.len();
    write_csv(&out.join("measurements.csv"), &["t", "feature", "kind", "z0", "z1", "z2", "z3"], meas)?;
    let rows = vec![SummaryRow::info("imu_samples", data.samples.len() as f64), SummaryRow::info("measurements", n_meas as f64)];
    write_summary(out, &rows)?;
    Ok(rows)
}
