//! Built-in figure scenarios.

use std::collections::BTreeMap;

use super::{DeviceConfig, ScenarioConfig, SpectrumConfig, Task};
use crate::drive::{DriveSpec, FrameMode};
use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 9] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10"];

const TLS_KAPPA: f64 = 7.2e-3;
const TRANSMON_KAPPA: f64 = 1.619e-3;
const TRANSMON_OMEGA_D: f64 = 1.0015;
/// Transmon eigenstates kept in preset dynamics; the leakage resonance
/// involves the fifth excited state.
pub const TRANSMON_LEVELS: usize = 8;

#[derive(Clone, Debug)]
pub struct PresetJob {
    pub label: String,
    pub task: Task,
    pub config: ScenarioConfig,
}

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub jobs: Vec<PresetJob>,
}

impl Preset {
    pub fn job(&self, label: &str) -> Option<&PresetJob> {
        self.jobs.iter().find(|j| j.label == label)
    }
}

fn integrator(kappa: f64, rtol: f64) -> IntegratorConfig {
    IntegratorConfig {
        rtol,
        atol: rtol * 1e-2,
        t_end: 10.0 / kappa,
        sample_dt: 0.05 / kappa,
        ..IntegratorConfig::default()
    }
}

pub fn tls_config(name: &str, amplitude: f64, frame: FrameMode, n_max: usize, branch: &str) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        kappa: TLS_KAPPA,
        frame,
        n_max,
        initial_branch: branch.into(),
        outputs: None,
        long: false,
        device: DeviceConfig::Tls { omega_q: 0.75, g: 3.0e-2 },
        drive: DriveSpec::monochromatic(amplitude, 1.0),
        integrator: integrator(TLS_KAPPA, 1e-8),
        spectrum: SpectrumConfig::default(),
        metadata: BTreeMap::new(),
    }
}

pub fn transmon_config(name: &str, amplitude: f64, frame: FrameMode, n_max: usize, branch: &str) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        kappa: TRANSMON_KAPPA,
        frame,
        n_max,
        initial_branch: branch.into(),
        outputs: None,
        long: false,
        device: DeviceConfig::Transmon {
            e_c: 5.0e-2,
            e_j: 1.6,
            g: 3.0e-2,
            n_g: 0.0,
            charge_cutoff: 10,
            qubit_levels: Some(TRANSMON_LEVELS),
        },
        drive: DriveSpec::monochromatic(amplitude, TRANSMON_OMEGA_D),
        integrator: integrator(TRANSMON_KAPPA, 1e-7),
        spectrum: SpectrumConfig::default(),
        metadata: BTreeMap::new(),
    }
}

fn job(task: Task, config: ScenarioConfig) -> PresetJob {
    PresetJob {
        label: config.name.clone(),
        task,
        config,
    }
}

fn frame_tag(f: FrameMode) -> &'static str {
    match f {
        FrameMode::Lab => "lab",
        FrameMode::PFrame => "p",
        FrameMode::QFrame => "q",
    }
}

fn amp_tag(e: f64) -> String {
    format!("E{e:.1e}")
}

fn note(mut c: ScenarioConfig, key: &str, value: &str) -> ScenarioConfig {
    c.metadata.insert(key.into(), value.into());
    c
}

fn long(mut c: ScenarioConfig) -> ScenarioConfig {
    c.long = true;
    c
}

fn fig2() -> Vec<PresetJob> {
    [(FrameMode::PFrame, 5), (FrameMode::PFrame, 20), (FrameMode::QFrame, 5), (FrameMode::QFrame, 20)]
        .into_iter()
        .map(|(f, n)| {
            let name = format!("{}_n{n}", frame_tag(f));
            job(Task::Dynamics, tls_config(&name, 1.0e-2, f, n, "g"))
        })
        .collect()
}

fn fig3() -> Vec<PresetJob> {
    [5, 10, 20]
        .into_iter()
        .map(|n| job(Task::Dynamics, tls_config(&format!("q_n{n}"), 1.0e-2, FrameMode::QFrame, n, "g")))
        .collect()
}

fn fig4() -> Vec<PresetJob> {
    let mut jobs = vec![];
    for (e, n, is_long) in [(6.0e-3, 30, false), (2.5e-2, 30, false), (7.0e-2, 50, true)] {
        for b in ["g", "e"] {
            let mut c = tls_config(&format!("{}_{b}", amp_tag(e)), e, FrameMode::QFrame, n, b);
            c = note(c, "amplitudes.primary", "6.0e-3, 2.5e-2, 7.0e-2");
            c = note(c, "amplitudes.alternate", "7.0e-3, 2.5e-2, 6.0e-2");
            c = note(
                c,
                "amplitudes.note",
                "two reported amplitude sets disagree; the primary set is used",
            );
            if is_long {
                c = long(c);
            }
            jobs.push(job(Task::Dynamics, c));
        }
    }
    jobs
}

fn fig5() -> Vec<PresetJob> {
    let mut c = tls_config("spectrum", 0.0, FrameMode::QFrame, 600, "g");
    c.spectrum.n_max = Some(600);
    vec![job(Task::Spectrum, c)]
}

fn fig6() -> Vec<PresetJob> {
    let mut c = transmon_config("spectrum", 0.0, FrameMode::QFrame, 200, "g");
    c.spectrum.n_max = Some(200);
    vec![job(Task::Spectrum, c)]
}

fn fig7() -> Vec<PresetJob> {
    [(FrameMode::PFrame, 10), (FrameMode::PFrame, 40), (FrameMode::QFrame, 10)]
        .into_iter()
        .map(|(f, n)| {
            let name = format!("{}_n{n}", frame_tag(f));
            job(Task::Dynamics, transmon_config(&name, 3.0e-3, f, n, "g"))
        })
        .collect()
}

/// `(E, n_max, long)` of the transmon readout figure.
const FIG8_CASES: [(f64, usize, bool); 6] = [
    (1.4e-3, 20, false),
    (2.0e-3, 20, false),
    (6.0e-3, 30, false),
    (7.0e-3, 60, false),
    (1.5e-2, 100, true),
    (2.4e-2, 100, true),
];

/// Reduced truncation for the default-suite run of the strongest
/// non-long sign-flip case.
pub const FIG8_REDUCED_N_MAX: usize = 40;

fn fig8_jobs(reference_n_max: Option<usize>) -> Vec<PresetJob> {
    let mut jobs = vec![];
    let annotate = |c: ScenarioConfig| {
        let c = note(c, "amplitudes.primary", "1.4e-3, 2.0e-3, 6.0e-3, 7.0e-3, 1.5e-2, 2.4e-2");
        note(c, "amplitudes.alternate", "1.4e-2, 2.0e-2, 6.0e-3, 7.0e-3, 1.5e-2, 2.4e-2")
    };
    let with_reference = |mut c: ScenarioConfig| {
        if let Some(n) = reference_n_max {
            c.spectrum.n_max = Some(n.max(c.n_max));
        }
        c
    };
    for (e, n, is_long) in FIG8_CASES {
        for b in ["g", "e"] {
            let mut c = annotate(transmon_config(&format!("{}_{b}", amp_tag(e)), e, FrameMode::QFrame, n, b));
            if is_long {
                c = long(c);
            }
            jobs.push(job(Task::Dynamics, with_reference(c)));
        }
    }
    let c = transmon_config(
        &format!("{}_g_reduced", amp_tag(1.5e-2)),
        1.5e-2,
        FrameMode::QFrame,
        FIG8_REDUCED_N_MAX,
        "g",
    );
    let c = note(annotate(c), "reduced", "n_max lowered from 100 for the default suite");
    jobs.push(job(Task::Dynamics, with_reference(c)));
    jobs
}

fn fig10() -> Vec<PresetJob> {
    let cases = [
        ("E6.0e-3", 6.0e-3, 40, false),
        ("E7.0e-3", 7.0e-3, 60, true),
        ("E7.0e-3_reduced", 7.0e-3, 40, false),
        ("E8.0e-3", 8.0e-3, 40, false),
    ];
    cases
        .into_iter()
        .map(|(name, e, n, is_long)| {
            let mut c = transmon_config(name, e, FrameMode::QFrame, n, "g");
            c.spectrum.n_max = Some(100);
            if is_long {
                c = long(c);
            }
            if name.ends_with("reduced") {
                c = note(c, "reduced", "n_max lowered from 60 for the default suite");
            }
            job(Task::Dynamics, c)
        })
        .collect()
}

pub fn preset(name: &str) -> Result<Preset> {
    let (name, description, jobs) = match name {
        "fig2" => ("fig2", "TLS photon number, P- vs Q-frame at n_max 5 and 20", fig2()),
        "fig3" => ("fig3", "TLS pinning residual |<c>_U| at n_max 5, 10, 20", fig3()),
        "fig4" => ("fig4", "TLS readout for three drive amplitudes from g and e", fig4()),
        "fig5" => ("fig5", "TLS photon-number-dependent cavity frequency", fig5()),
        "fig6" => ("fig6", "transmon photon-number-dependent cavity frequency", fig6()),
        "fig7" => ("fig7", "transmon photon number, P- vs Q-frame", fig7()),
        "fig8" => ("fig8", "transmon readout for six drive amplitudes from g and e", fig8_jobs(None)),
        "fig9" => (
            "fig9",
            "transmon occupation versus photon number with labeled-branch reference",
            fig8_jobs(Some(100)),
        ),
        "fig10" => ("fig10", "transmon occupation near the leakage resonance", fig10()),
        other => {
            return Err(Error::Config(format!(
                "unknown preset `{other}`; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(Preset {
        name,
        description,
        jobs,
    })
}
