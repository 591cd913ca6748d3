//! Scenario configuration, execution and on-disk artifacts.
//!
//! A run directory holds `config.toml` (the exact configuration used),
//! `trajectory.csv` and/or `spectrum.csv`, and `record.json`.

mod presets;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::device::{build_tls, build_transmon, SystemModel, TlsParams, TransmonParams};
use crate::drive::{DriveSpec, FrameMode};
use crate::dynamics::{integrate, prepare_initial, Diagnostics, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::spectrum::{
    branch_name, diagonalize_joint, dispersive_summary, label_branches, parse_branch,
    write_spectrum_csv, DispersiveSummary, LabelOptions, LabeledSpectrum,
};

pub use presets::{preset, Preset, PresetJob, PRESET_NAMES};

pub const TRAJECTORY_CSV_HEADER: [&str; 9] = [
    "t",
    "kappa_t",
    "alpha_re",
    "alpha_im",
    "photon_number",
    "real_quadrature",
    "abs_c_u",
    "transmon_occupation",
    "trace_error",
];

pub const CONFIG_FILE: &str = "config.toml";
pub const RECORD_FILE: &str = "record.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const INDEX_FILE: &str = "index.json";

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DeviceConfig {
    Tls {
        omega_q: f64,
        g: f64,
    },
    Transmon {
        e_c: f64,
        e_j: f64,
        g: f64,
        #[serde(default)]
        n_g: f64,
        #[serde(default = "default_charge_cutoff")]
        charge_cutoff: usize,
        /// Transmon eigenstates kept in the dynamics; all `2·cutoff+1` when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        qubit_levels: Option<usize>,
    },
}

fn default_charge_cutoff() -> usize {
    10
}

impl DeviceConfig {
    fn qubit_dim(&self) -> usize {
        match self {
            DeviceConfig::Tls { .. } => 2,
            DeviceConfig::Transmon {
                charge_cutoff,
                qubit_levels,
                ..
            } => qubit_levels.unwrap_or(2 * charge_cutoff + 1),
        }
    }
}

/// Labeled-spectrum settings. `n_max` defaults to the dynamics truncation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branches: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub kappa: f64,
    pub frame: FrameMode,
    pub n_max: usize,
    #[serde(default = "default_branch")]
    pub initial_branch: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<PathBuf>,
    /// Excluded from default preset runs.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub long: bool,
    pub device: DeviceConfig,
    pub drive: DriveSpec,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

fn default_branch() -> String {
    "g".into()
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_owned()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "-_.=+".contains(c))
        {
            return Err(Error::invalid(
                "name",
                "must be non-empty and use only ASCII letters, digits and -_.=+",
            ));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::invalid("kappa", "must be positive and finite"));
        }
        if self.n_max == 0 {
            return Err(Error::invalid("n_max", "must be at least 1"));
        }
        self.drive.validate()?;
        self.integrator.validate().map_err(|e| prefix("integrator", e))?;
        match &self.device {
            DeviceConfig::Tls { omega_q, g } => TlsParams {
                omega_q: *omega_q,
                g: *g,
            }
            .validate(),
            DeviceConfig::Transmon { qubit_levels, .. } => {
                let p = self.transmon_params().expect("transmon");
                p.validate()?;
                match qubit_levels {
                    Some(k) if *k < 2 || *k > p.q_dim() => Err(Error::invalid(
                        "device.qubit_levels",
                        format!("must lie in [2, {}]", p.q_dim()),
                    )),
                    _ => Ok(()),
                }
            }
        }
        .map_err(|e| prefix("device", e))?;
        let branch = parse_branch(&self.initial_branch)
            .map_err(|_| Error::invalid("initial_branch", "expected g, e, f or lN"))?;
        if branch >= self.device.qubit_dim() {
            return Err(Error::invalid(
                "initial_branch",
                format!("level {branch} is not among the {} qubit levels", self.device.qubit_dim()),
            ));
        }
        if self.spectrum.n_max == Some(0) {
            return Err(Error::invalid("spectrum.n_max", "must be at least 1"));
        }
        if let Some(b) = self.spectrum.branches {
            if b == 0 || b > self.device.qubit_dim() {
                return Err(Error::invalid(
                    "spectrum.branches",
                    format!("must lie in [1, {}]", self.device.qubit_dim()),
                ));
            }
        }
        Ok(())
    }

    fn transmon_params(&self) -> Option<TransmonParams> {
        match self.device {
            DeviceConfig::Transmon {
                e_c,
                e_j,
                g,
                n_g,
                charge_cutoff,
                ..
            } => Some(TransmonParams {
                e_c,
                e_j,
                g,
                n_g,
                charge_cutoff,
            }),
            DeviceConfig::Tls { .. } => None,
        }
    }

    /// The full device at truncation `n_max`.
    pub fn device_model(&self, n_max: usize) -> Result<SystemModel> {
        match self.device {
            DeviceConfig::Tls { omega_q, g } => build_tls(TlsParams { omega_q, g }, self.kappa, n_max),
            DeviceConfig::Transmon { .. } => {
                build_transmon(self.transmon_params().expect("transmon"), self.kappa, n_max)
            }
        }
    }

    /// The model integrated by [`run`]: `n_max` photons and, for a transmon,
    /// the lowest `qubit_levels` eigenstates.
    pub fn dynamics_model(&self) -> Result<SystemModel> {
        let model = self.device_model(self.n_max)?;
        match self.device {
            DeviceConfig::Transmon {
                qubit_levels: Some(k),
                ..
            } => model.in_qubit_eigenbasis(Some(k)),
            _ => Ok(model),
        }
    }

    pub fn spectrum_n_max(&self) -> usize {
        self.spectrum.n_max.unwrap_or(self.n_max)
    }

    pub fn initial_level(&self) -> Result<usize> {
        parse_branch(&self.initial_branch)
    }

    /// Overrides one field addressed by a dotted path such as
    /// `drive.amplitude`. `raw` is a TOML literal; bare words are strings.
    pub fn with_param(&self, path: &str, raw: &str) -> Result<Self> {
        let mut root = toml::Table::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        let value = parse_literal(raw);
        let keys: Vec<&str> = path.split('.').collect();
        if keys.iter().any(|k| k.is_empty()) {
            return Err(Error::Config(format!("malformed parameter path `{path}`")));
        }
        let (last, parents) = keys.split_last().expect("non-empty");
        let mut table = &mut root;
        for key in parents {
            table = table
                .entry(key.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| Error::Config(format!("`{key}` in `{path}` is not a table")))?;
        }
        table.insert(last.to_string(), value);
        let cfg: ScenarioConfig = root
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("{path} = {raw}: {}", e.to_string().trim_end())))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn prefix(scope: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { field, reason } if !field.starts_with(scope) => {
            Error::InvalidParameter {
                field: format!("{scope}.{field}"),
                reason,
            }
        }
        other => other,
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    let raw = raw.trim();
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_owned()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Dynamics,
    Spectrum,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    /// The integrator stopped early; the trajectory files hold the samples
    /// reached so far.
    Aborted { t: f64, reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchInfo {
    pub branch: String,
    pub labels: usize,
    pub n_reliable: usize,
    pub min_overlap: f64,
}

/// Qubit transition energies of the bare device.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QubitLevels {
    pub e_ge: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_ef: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anharmonicity: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub dimension: usize,
    pub qubit: QubitLevels,
    pub dispersive: DispersiveSummary,
    pub branches: Vec<BranchInfo>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub name: String,
    pub task: Task,
    pub status: RunStatus,
    pub directory: PathBuf,
    pub artifacts: Vec<PathBuf>,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumReport>,
    pub version: String,
    pub config: ScenarioConfig,
}

impl RunRecord {
    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Complete
    }
}

/// Runs the labeled spectrum needed for the initial state, integrates the
/// master equation and writes `trajectory.csv`, `spectrum.csv`,
/// `config.toml` and `record.json` into `dir`.
///
/// An integrator abort still writes every file and is reported through
/// [`RunRecord::status`].
pub fn run(config: &ScenarioConfig, dir: &Path) -> Result<RunRecord> {
    config.validate()?;
    let start = Instant::now();
    fs::create_dir_all(dir)?;
    let trajectory = simulate(config)?;
    let abort = trajectory.diagnostics.abort.clone();

    let reference = reference_spectrum(config)?;
    let mut artifacts = vec![];
    let path = dir.join(TRAJECTORY_FILE);
    write_trajectory_csv(&trajectory, &path)?;
    artifacts.push(path);
    let path = dir.join(SPECTRUM_FILE);
    write_spectrum_csv(&reference.1, &path)?;
    artifacts.push(path);

    let status = match abort {
        Some(a) => RunStatus::Aborted {
            t: a.t,
            reason: a.reason,
        },
        None => RunStatus::Complete,
    };
    finish(
        config,
        dir,
        Task::Dynamics,
        status,
        artifacts,
        start,
        Some(trajectory.diagnostics),
        None,
    )
}

/// The in-memory part of [`run`]: prepares `|p̃,0̃⟩` and integrates.
pub fn simulate(config: &ScenarioConfig) -> Result<Trajectory> {
    config.validate()?;
    let level = config.initial_level()?;
    let model = config.dynamics_model()?;
    let opts = LabelOptions {
        branches: level + 1,
        n_stop: Some(0),
    };
    let spec = label_branches(diagonalize_joint(&model)?, &model, opts)?;
    let initial = prepare_initial(&spec, level, &model, config.frame)?;
    integrate(&initial, &model, &config.drive, config.frame, &config.integrator)
}

/// Labels the joint spectrum of the full device and writes `spectrum.csv`
/// plus a `summary.json` with the dispersive quantities.
pub fn run_spectrum(config: &ScenarioConfig, dir: &Path) -> Result<RunRecord> {
    config.validate()?;
    let start = Instant::now();
    fs::create_dir_all(dir)?;
    let (model, spec) = reference_spectrum(config)?;
    let report = spectrum_report(&model, &spec)?;
    let mut artifacts = vec![];
    let path = dir.join(SPECTRUM_FILE);
    write_spectrum_csv(&spec, &path)?;
    artifacts.push(path);
    let path = dir.join(SUMMARY_FILE);
    write_json(&path, &report)?;
    artifacts.push(path);
    finish(
        config,
        dir,
        Task::Spectrum,
        RunStatus::Complete,
        artifacts,
        start,
        None,
        Some(report),
    )
}

pub fn execute(task: Task, config: &ScenarioConfig, dir: &Path) -> Result<RunRecord> {
    match task {
        Task::Dynamics => run(config, dir),
        Task::Spectrum => run_spectrum(config, dir),
    }
}

/// Full device at `spectrum.n_max`, labeled on every requested branch.
pub fn reference_spectrum(config: &ScenarioConfig) -> Result<(SystemModel, LabeledSpectrum)> {
    let model = config.device_model(config.spectrum_n_max())?;
    let branches = config
        .spectrum
        .branches
        .unwrap_or(2)
        .max(config.initial_level()? + 1)
        .min(model.trunc.q_dim);
    let opts = LabelOptions {
        branches,
        n_stop: None,
    };
    let spec = label_branches(diagonalize_joint(&model)?, &model, opts)?;
    Ok((model, spec))
}

pub fn spectrum_report(model: &SystemModel, spec: &LabeledSpectrum) -> Result<SpectrumReport> {
    let e = &spec.qubit_energies;
    let qubit = QubitLevels {
        e_ge: e[1] - e[0],
        e_ef: e.get(2).map(|x| x - e[1]),
        anharmonicity: e.get(2).map(|x| (x - e[1]) - (e[1] - e[0])),
    };
    let branches = spec
        .branches
        .iter()
        .map(|b| BranchInfo {
            branch: branch_name(b.qubit_level),
            labels: b.len(),
            n_reliable: b.n_reliable,
            min_overlap: b.overlaps.iter().copied().fold(1.0, f64::min),
        })
        .collect();
    Ok(SpectrumReport {
        dimension: model.trunc.dim(),
        qubit,
        dispersive: dispersive_summary(spec, model)?,
        branches,
    })
}

#[allow(clippy::too_many_arguments)]
fn finish(
    config: &ScenarioConfig,
    dir: &Path,
    task: Task,
    status: RunStatus,
    mut artifacts: Vec<PathBuf>,
    start: Instant,
    diagnostics: Option<Diagnostics>,
    spectrum: Option<SpectrumReport>,
) -> Result<RunRecord> {
    let path = dir.join(CONFIG_FILE);
    fs::write(&path, config.to_toml_string()?)?;
    artifacts.push(path);
    artifacts.push(dir.join(RECORD_FILE));
    let record = RunRecord {
        name: config.name.clone(),
        task,
        status,
        directory: dir.to_path_buf(),
        artifacts,
        wall_time_s: start.elapsed().as_secs_f64(),
        diagnostics,
        spectrum,
        version: VERSION.into(),
        config: config.clone(),
    };
    write_json(&dir.join(RECORD_FILE), &record)?;
    Ok(record)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_trajectory_csv(trajectory: &Trajectory, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRAJECTORY_CSV_HEADER)?;
    for s in &trajectory.samples {
        w.write_record([
            fmt_f64(s.t),
            fmt_f64(s.kappa_t),
            fmt_f64(s.alpha.re),
            fmt_f64(s.alpha.im),
            fmt_f64(s.photon_number),
            fmt_f64(s.real_quadrature),
            fmt_f64(s.abs_c_u),
            s.transmon_occupation.map(fmt_f64).unwrap_or_default(),
            fmt_f64(s.trace_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row of a trajectory CSV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub kappa_t: f64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub photon_number: f64,
    pub real_quadrature: f64,
    pub abs_c_u: f64,
    pub transmon_occupation: Option<f64>,
    pub trace_error: f64,
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != TRAJECTORY_CSV_HEADER {
        return Err(Error::Config(format!(
            "{}: unexpected header {header:?}",
            path.display()
        )));
    }
    let num = |s: &str, col: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::Config(format!("{}: bad `{col}` value `{s}`", path.display())))
    };
    let mut rows = vec![];
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| num(&rec[i], TRAJECTORY_CSV_HEADER[i]);
        rows.push(TrajectoryRow {
            t: f(0)?,
            kappa_t: f(1)?,
            alpha_re: f(2)?,
            alpha_im: f(3)?,
            photon_number: f(4)?,
            real_quadrature: f(5)?,
            abs_c_u: f(6)?,
            transmon_occupation: if rec[7].is_empty() { None } else { Some(f(7)?) },
            trace_error: f(8)?,
        });
    }
    Ok(rows)
}

/// A unit of batch work: one configuration executed into one directory.
#[derive(Clone, Debug)]
pub struct Job {
    pub label: String,
    pub task: Task,
    pub config: ScenarioConfig,
    pub dir: PathBuf,
    /// Why the job's configuration could not be built; it is recorded as
    /// failed without running.
    pub invalid: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexEntry {
    pub label: String,
    pub task: Task,
    pub directory: PathBuf,
    pub state: EntryState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryState {
    Complete,
    Aborted,
    Failed,
}

#[derive(Debug, Serialize)]
pub struct BatchIndex {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    pub entries: Vec<IndexEntry>,
    pub version: String,
    #[serde(skip)]
    pub records: Vec<Option<RunRecord>>,
    #[serde(skip)]
    pub errors: Vec<Option<Error>>,
}

impl BatchIndex {
    /// Exit status summarizing the batch: the first failure's code, else 3
    /// if any run aborted, else 0.
    pub fn exit_code(&self) -> i32 {
        if let Some(e) = self.errors.iter().flatten().next() {
            return e.exit_code();
        }
        if self.entries.iter().any(|e| e.state == EntryState::Aborted) {
            return 3;
        }
        0
    }
}

/// Executes `jobs` on up to `workers` threads. Failures are recorded per
/// job and never stop the others.
pub fn run_jobs(jobs: &[Job], workers: usize) -> Vec<Result<RunRecord>> {
    let slots: Vec<Mutex<Option<Result<RunRecord>>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = workers.clamp(1, jobs.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = jobs.get(i) else { break };
                log::info!("start {}", job.label);
                let out = match &job.invalid {
                    Some(msg) => Err(Error::Config(msg.clone())),
                    None => execute(job.task, &job.config, &job.dir),
                };
                match &out {
                    Ok(r) => log::info!("done {} in {:.1} s", job.label, r.wall_time_s),
                    Err(e) => log::error!("{} failed: {e}", job.label),
                }
                *slots[i].lock().expect("slot") = Some(out);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot").expect("every job ran"))
        .collect()
}

/// Runs `jobs` and writes `index.json` into `dir`.
pub fn run_batch(name: &str, parameter: Option<&str>, jobs: &[Job], dir: &Path, workers: usize) -> Result<BatchIndex> {
    fs::create_dir_all(dir)?;
    let results = run_jobs(jobs, workers);
    let mut index = BatchIndex {
        name: name.into(),
        parameter: parameter.map(str::to_owned),
        entries: vec![],
        version: VERSION.into(),
        records: vec![],
        errors: vec![],
    };
    for (job, res) in jobs.iter().zip(results) {
        let (state, error, wall, record, err) = match res {
            Ok(r) => {
                let state = if r.is_complete() {
                    EntryState::Complete
                } else {
                    EntryState::Aborted
                };
                (state, None, Some(r.wall_time_s), Some(r), None)
            }
            Err(e) => (EntryState::Failed, Some(e.to_string()), None, None, Some(e)),
        };
        index.entries.push(IndexEntry {
            label: job.label.clone(),
            task: job.task,
            directory: job.dir.clone(),
            state,
            error,
            wall_time_s: wall,
        });
        index.records.push(record);
        index.errors.push(err);
    }
    write_json(&dir.join(INDEX_FILE), &index)?;
    Ok(index)
}

/// Expands `base` over `values` of the dotted `parameter`, one
/// subdirectory per value. A value that yields an invalid configuration
/// becomes a job marked `invalid`.
pub fn sweep_jobs(base: &ScenarioConfig, task: Task, parameter: &str, values: &[String], dir: &Path) -> Vec<Job> {
    values
        .iter()
        .enumerate()
        .map(|(i, raw)| {
            let label = format!("{parameter}={}", raw.trim());
            let (mut config, invalid) = match base.with_param(parameter, raw) {
                Ok(c) => (c, None),
                Err(e) => (base.clone(), Some(e.to_string())),
            };
            config.name = sanitize(&format!("{}_{label}", base.name));
            config.outputs = None;
            config.metadata.insert("sweep.parameter".into(), parameter.into());
            config.metadata.insert("sweep.value".into(), raw.trim().into());
            Job {
                dir: dir.join(format!("{i:03}_{}", sanitize(&label))),
                label,
                task,
                config,
                invalid,
            }
        })
        .collect()
}

pub fn sweep(
    base: &ScenarioConfig,
    task: Task,
    parameter: &str,
    values: &[String],
    dir: &Path,
    workers: usize,
) -> Result<BatchIndex> {
    let jobs = sweep_jobs(base, task, parameter, values, dir);
    run_batch(&base.name, Some(parameter), &jobs, dir, workers)
}

/// Jobs of a preset, one subdirectory per job label.
pub fn preset_jobs(preset: &Preset, dir: &Path, include_long: bool) -> Vec<Job> {
    preset
        .jobs
        .iter()
        .filter(|j| include_long || !j.config.long)
        .map(|j| Job {
            label: j.label.clone(),
            task: j.task,
            config: j.config.clone(),
            dir: dir.join(&j.label),
            invalid: None,
        })
        .collect()
}

pub fn run_preset(preset: &Preset, dir: &Path, include_long: bool, workers: usize) -> Result<BatchIndex> {
    let jobs = preset_jobs(preset, dir, include_long);
    run_batch(preset.name, None, &jobs, dir, workers)
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.=+".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}
