use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ains(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ains")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

const QUICK_MC: &str = "
seed = 7
[trajectory]
duration = 4.0
[scene]
points = 6
lines = 2
planes = 1
[mc]
runs = 3
";

#[test]
fn unknown_key_exits_with_two_and_names_it() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[scene]\nponits = 3\n");
    let out = ains(&["observability", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ponits"));
}

#[test]
fn malformed_config_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[scene\npoints = 3\n");
    let out = ains(&["mc", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_plane_rank_ends_at_seven() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[scene]\npoints = 0\nlines = 0\nplanes = 1\n[observability]\ncases = [\"single_plane\"]\n");
    let out_dir = dir.path().join("obs");
    let out = ains(&["observability", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let ranks = read_csv(&out_dir.join("rank_over_time.csv"));
    assert_eq!(ranks.last().unwrap()[1], "7");
    let res = read_csv(&out_dir.join("nullspace_residuals.csv"));
    assert_eq!(res.len(), 1);
    assert_eq!(res[0][0], "single_plane");
    assert_eq!(res[0][2], "true");
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert!(summary.as_array().unwrap().iter().all(|r| r["pass"] == true));
}

#[test]
fn noise_free_monte_carlo_has_no_error() {
    let dir = TempDir::new().unwrap();
    let text = format!("{QUICK_MC}[filter]\ndata_noise_scale = 0.0\ninitial_error = false\n");
    let cfg = write_config(dir.path(), &text);
    let out_dir = dir.path().join("mc");
    let out = ains(&["mc", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.code().is_some_and(|c| c < 2), "{}", String::from_utf8_lossy(&out.stderr));
    for mode in ["standard", "ideal"] {
        for row in read_csv(&out_dir.join(mode).join("rmse.csv")) {
            let ori: f64 = row[1].parse().unwrap();
            let pos: f64 = row[2].parse().unwrap();
            assert!(ori < 1e-6 && pos < 1e-6, "{mode} t={} ori={ori} pos={pos}", row[0]);
        }
    }
}

#[test]
fn outputs_do_not_depend_on_job_count() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), QUICK_MC);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ains(&["mc", "--config", &cfg, "--out", a.to_str().unwrap(), "--jobs", "1"]);
    ains(&["mc", "--config", &cfg, "--out", b.to_str().unwrap(), "--jobs", "3"]);
    for f in ["standard/rmse.csv", "standard/nees.csv", "ideal/rmse.csv", "ideal/nees.csv", "summary.json"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert!(!x.is_empty(), "{f}");
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn simulate_writes_all_streams() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), QUICK_MC);
    let out_dir = dir.path().join("sim");
    let out = ains(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let truth = read_csv(&out_dir.join("truth.csv"));
    let imu = read_csv(&out_dir.join("imu.csv"));
    assert_eq!(truth.len(), imu.len());
    assert_eq!(truth[0].len(), 17);
    let meas = read_csv(&out_dir.join("measurements.csv"));
    assert!(meas.iter().any(|r| r[2] == "point") && meas.iter().any(|r| r[2] == "line") && meas.iter().any(|r| r[2] == "cp_plane"));
}

#[test]
fn degenerate_reports_every_motion() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("deg");
    ains(&["degenerate", "--out", out_dir.to_str().unwrap()]);
    let rows = read_csv(&out_dir.join("degenerate.csv"));
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["pure_translation", "constant_local_accel", "pure_rotation", "toward_point", "parallel_to_line"]);
    for r in &rows {
        assert!(r[3].parse::<f64>().unwrap() < 1e-8, "{r:?}");
    }
}
