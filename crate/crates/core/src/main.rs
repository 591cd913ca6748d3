use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qframe::scenario::{self, BatchIndex, RunRecord, ScenarioConfig, Task};
use qframe::Error;

/// Displaced-frame readout simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (defaults to the config's `outputs`, else `runs/<name>`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Concurrent runs for sweeps and presets.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario.
    Run { config: PathBuf },
    /// Label the joint spectrum and write dispersive quantities.
    Spectrum { config: PathBuf },
    /// Repeat a scenario over values of one config field.
    Sweep {
        config: PathBuf,
        /// Dotted field path, e.g. `drive.amplitude`.
        #[arg(long)]
        param: String,
        /// Comma-separated TOML literals.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
        /// Run the spectrum task instead of dynamics.
        #[arg(long)]
        spectrum: bool,
    },
    /// Run a built-in figure scenario.
    Preset {
        /// One of fig2 … fig10.
        name: String,
        /// Include long-running cases.
        #[arg(long)]
        long: bool,
        /// Write each job's config.toml without running it.
        #[arg(long)]
        dry_run: bool,
    },
    /// List the built-in presets.
    Presets,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if cli.verbose {
        "info"
    } else {
        "warn"
    }))
    .init();
    let code = match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn out_dir(cli: &Cli, config: &ScenarioConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| config.outputs.clone())
        .unwrap_or_else(|| Path::new("runs").join(&config.name))
}

fn execute(cli: &Cli) -> qframe::Result<i32> {
    match &cli.command {
        Command::Run { config } => {
            let cfg = ScenarioConfig::load(config)?;
            single(scenario::run(&cfg, &out_dir(cli, &cfg))?)
        }
        Command::Spectrum { config } => {
            let cfg = ScenarioConfig::load(config)?;
            single(scenario::run_spectrum(&cfg, &out_dir(cli, &cfg))?)
        }
        Command::Sweep {
            config,
            param,
            values,
            spectrum,
        } => {
            let cfg = ScenarioConfig::load(config)?;
            let task = if *spectrum { Task::Spectrum } else { Task::Dynamics };
            let values: Vec<String> = values.iter().filter(|v| !v.trim().is_empty()).cloned().collect();
            let dir = out_dir(cli, &cfg);
            let index = scenario::sweep(&cfg, task, param, &values, &dir, cli.workers)?;
            batch(&index, &dir)
        }
        Command::Preset { name, long, dry_run } => {
            let preset = scenario::preset(name)?;
            let dir = cli.out.clone().unwrap_or_else(|| Path::new("runs").join(preset.name));
            if *dry_run {
                for job in scenario::preset_jobs(&preset, &dir, *long) {
                    std::fs::create_dir_all(&job.dir)?;
                    let path = job.dir.join(scenario::CONFIG_FILE);
                    std::fs::write(&path, job.config.to_toml_string()?)?;
                    println!("{}", path.display());
                }
                return Ok(0);
            }
            let index = scenario::run_preset(&preset, &dir, *long, cli.workers)?;
            batch(&index, &dir)
        }
        Command::Presets => {
            for name in scenario::PRESET_NAMES {
                let p = scenario::preset(name)?;
                let long = p.jobs.iter().filter(|j| j.config.long).count();
                println!("{name:<6} {} ({} jobs, {long} long)", p.description, p.jobs.len());
            }
            Ok(0)
        }
    }
}

fn single(record: RunRecord) -> qframe::Result<i32> {
    let path = record.directory.join(scenario::RECORD_FILE);
    match &record.status {
        scenario::RunStatus::Complete => {
            println!("{} complete in {:.1} s: {}", record.name, record.wall_time_s, path.display());
            Ok(0)
        }
        scenario::RunStatus::Aborted { t, reason } => {
            eprintln!(
                "{} aborted at t = {t}: {reason}; partial outputs in {}",
                record.name,
                record.directory.display()
            );
            Err(Error::IntegratorAbort {
                t: *t,
                reason: reason.clone(),
            })
        }
    }
}

fn batch(index: &BatchIndex, dir: &Path) -> qframe::Result<i32> {
    for e in &index.entries {
        match &e.error {
            Some(msg) => eprintln!("{:<24} failed: {msg}", e.label),
            None => println!("{:<24} {:?} {}", e.label, e.state, e.directory.display()),
        }
    }
    println!("index: {}", dir.join(scenario::INDEX_FILE).display());
    Ok(index.exit_code())
}
