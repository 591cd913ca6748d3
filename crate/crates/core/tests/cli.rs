//! Command-line behavior: exit codes, output layout, batch indices.

use std::path::Path;
use std::process::{Command, Output};

use qframe::scenario::{read_trajectory_csv, ScenarioConfig, TRAJECTORY_CSV_HEADER};

const SMALL: &str = r#"
name = "small"
kappa = 0.0072
frame = "q_frame"
n_max = 3

[device]
kind = "tls"
omega_q = 0.75
g = 0.03

[drive]
amplitude = 0.01
omega_d = 1.0

[integrator]
rtol = 1e-7
atol = 1e-9
t_end = 50.0
sample_dt = 10.0
"#;

fn qframe(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qframe"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_outputs_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let o = qframe(&["run", &cfg, "--out", "out"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = tmp.path().join("out");
    let text = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), TRAJECTORY_CSV_HEADER.join(","));
    assert_eq!(read_trajectory_csv(&out.join("trajectory.csv")).unwrap().len(), 6);
    let record: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("record.json")).unwrap()).unwrap();
    assert_eq!(record["status"]["state"], "complete");
    assert!(out.join("spectrum.csv").exists());
    let saved = ScenarioConfig::load(&out.join("config.toml")).unwrap();
    assert_eq!(saved, ScenarioConfig::from_toml_str(SMALL).unwrap());
}

#[test]
fn default_output_directory_uses_name() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let o = qframe(&["run", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(tmp.path().join("runs/small/record.json").exists());
}

#[test]
fn invalid_config_exits_two_and_names_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL.replace("g = 0.03", "g = 0.03\ncoupling = 1.0"));
    let o = qframe(&["run", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("coupling"), "{}", stderr(&o));

    let cfg = write_config(tmp.path(), &SMALL.replace("kappa = 0.0072", "kappa = -1.0"));
    let o = qframe(&["run", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kappa"), "{}", stderr(&o));
}

#[test]
fn missing_config_exits_four() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qframe(&["run", "nowhere.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn abort_exits_three_and_keeps_partial_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL.replace("sample_dt = 10.0", "sample_dt = 10.0\nmax_steps = 5"));
    let o = qframe(&["run", &cfg, "--out", "out"], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let out = tmp.path().join("out");
    let record: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("record.json")).unwrap()).unwrap();
    assert_eq!(record["status"]["state"], "aborted");
    assert!(!read_trajectory_csv(&out.join("trajectory.csv")).unwrap().is_empty());
}

#[test]
fn sweep_writes_index_per_value() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let o = qframe(
        &["sweep", &cfg, "--param", "drive.amplitude", "--values", "0.005,0.02", "--out", "sw", "--workers", "2"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let index: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("sw/index.json")).unwrap()).unwrap();
    assert_eq!(index["parameter"], "drive.amplitude");
    let entries = index["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    for e in entries {
        assert_eq!(e["state"], "complete");
        let dir = Path::new(e["directory"].as_str().unwrap());
        let dir = if dir.is_absolute() { dir.to_path_buf() } else { tmp.path().join(dir) };
        assert!(dir.join("trajectory.csv").exists());
    }
}

#[test]
fn sweep_with_bad_value_reports_it_and_runs_the_rest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let o = qframe(&["sweep", &cfg, "--param", "kappa", "--values", "0.0072,-3.0", "--out", "sw"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let index: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("sw/index.json")).unwrap()).unwrap();
    let entries = index["entries"].as_array().unwrap();
    assert_eq!(entries[0]["state"], "complete");
    assert_eq!(entries[1]["state"], "failed");
}

#[test]
fn preset_dry_run_writes_loadable_configs() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qframe(&["preset", "fig2", "--dry-run", "--out", "p"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let paths: Vec<String> = String::from_utf8(o.stdout).unwrap().lines().map(str::to_owned).collect();
    assert_eq!(paths.len(), 4);
    for p in paths {
        ScenarioConfig::load(&tmp.path().join(p)).unwrap();
    }
}

#[test]
fn unknown_preset_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qframe(&["preset", "fig1"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn presets_lists_every_figure() {
    let tmp = tempfile::tempdir().unwrap();
    let o = qframe(&["presets"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for name in qframe::scenario::PRESET_NAMES {
        assert!(text.contains(name), "{name} missing");
    }
}
