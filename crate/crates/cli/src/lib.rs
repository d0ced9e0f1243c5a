//! Command-line driver: argument parsing, configuration loading and the four
//! subcommands. Exit codes: 0 success, 1 failed checks, 2 configuration
//! error, 3 I/O or runtime error.

pub mod manifest;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use threewave_core::bounds::BoundSet;
use threewave_core::config::{parse_config, preset};
use threewave_core::integrator::{integrate, MlPair};
use threewave_core::state::init_from_spec;
use threewave_core::verify::run_all;
use threewave_core::{ConfigError, InitialDataSpec, Model, RunConfig, State};

use manifest::{repro_manifest, ReproFiles};
use output::{file, time_tag};

#[derive(Debug, Parser)]
#[command(name = "threewave", version, about = "Discrete 3-wave kinetic solver and verification suite")]
pub struct Cli {
    /// Configuration file (flat dotted-key TOML).
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Use a bundled configuration instead of a file.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,
    /// Seed of the randomized verification ensembles.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Record wall times in the report. Off by default so that reruns with the
    /// same config and seed produce byte-identical files.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate and write the diagnostics time series and snapshots.
    Simulate,
    /// Run the verification suite and write the report.
    Verify,
    /// Evaluate the a priori bounds for the configured data.
    Bounds,
    /// Reproduce a bundled test case with its plot manifest.
    Repro {
        #[arg(value_parser = ["test1", "test2"])]
        preset: String,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("cannot read configuration {}: {source}", path.display())]
    ConfigRead { path: PathBuf, source: std::io::Error },
    #[error("no configuration given; pass --config PATH or --preset NAME")]
    NoConfig,
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Run(#[from] threewave_core::Error),
    #[error("{0} verification checks failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Config(_) | CliError::ConfigRead { .. } | CliError::NoConfig => 2,
            CliError::Io { .. } | CliError::Run(_) => 3,
        }
    }
}

/// Loads the configuration named on the command line. Relative data-file
/// paths are resolved against the configuration file's directory.
pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
                path: path.clone(),
                source,
            })?;
            let mut cfg = parse_config(&text)?;
            if let InitialDataSpec::File { path: data } = &mut cfg.init {
                if data.is_relative() {
                    let base = path.parent().unwrap_or(Path::new(""));
                    *data = base.join(&*data);
                }
            }
            cfg
        }
        (None, Some(name)) => preset(name)?,
        (None, None) => return Err(CliError::NoConfig),
    };
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

fn initial_state(cfg: &RunConfig) -> Result<(Model, State), CliError> {
    let s0 = init_from_spec(&cfg.model, &cfg.init)?;
    Ok((Model::new(cfg.model.clone())?, s0))
}

fn bound_set(cfg: &RunConfig, s0: &State) -> Result<BoundSet, CliError> {
    let mut orders: Vec<f64> = Vec::new();
    for pair in &cfg.diagnostics.ml {
        if !orders.contains(&pair.a) {
            orders.push(pair.a);
        }
    }
    if orders.is_empty() {
        orders.push(1.0);
    }
    Ok(BoundSet::evaluate(
        &cfg.model,
        s0.moment(1.0),
        &cfg.diagnostics.moment_orders,
        &orders,
    )?)
}

/// Files written by a simulation.
struct SimulationOutput {
    timeseries: PathBuf,
    snapshots: Vec<(f64, State)>,
    ml_pairs: Vec<MlPair>,
}

fn simulate(cfg: &RunConfig) -> Result<SimulationOutput, CliError> {
    let (model, s0) = initial_state(cfg)?;
    let dir = &cfg.output.dir;
    output::ensure_dir(dir)?;
    let traj = integrate(&model, &s0, &cfg.sim, &cfg.diagnostics.ml)?;
    let timeseries = file(dir, &cfg.output.timeseries_stem, "csv");
    output::write_timeseries(&timeseries, &traj)?;
    let mut snapshots = Vec::new();
    for snap in &traj.snapshots {
        let stem = format!("{}_{}", cfg.output.snapshot_stem, time_tag(snap.requested));
        output::write_snapshot(&file(dir, &stem, "csv"), &snap.state, None)?;
        snapshots.push((snap.requested, snap.state.clone()));
    }
    log::info!(
        "{} steps, {} rows, clamped mass {:e}, min f {:e}",
        traj.steps,
        traj.rows.len(),
        traj.clamped_mass,
        traj.final_state.min_value()
    );
    println!(
        "simulated {} steps to t = {}; wrote {}",
        traj.steps,
        cfg.sim.t_final,
        timeseries.display()
    );
    Ok(SimulationOutput {
        timeseries,
        snapshots,
        ml_pairs: traj.ml_pairs,
    })
}

fn verify(cfg: &RunConfig, seed: u64, timing: bool) -> Result<(), CliError> {
    let (_, s0) = initial_state(cfg)?;
    let dir = &cfg.output.dir;
    output::ensure_dir(dir)?;
    let mut report = run_all(&cfg.model, &cfg.sim, &s0, &cfg.verify, seed)?;
    if !timing {
        for e in &mut report.entries {
            e.seconds = 0.0;
        }
    }
    let text = report.to_text();
    output::write_report_csv(&file(dir, &cfg.output.report_stem, "csv"), &report)?;
    output::write_text(&file(dir, &cfg.output.report_stem, "txt"), &text)?;
    print!("{text}");
    match report.failures().count() {
        0 => Ok(()),
        n => Err(CliError::ChecksFailed(n)),
    }
}

fn bounds(cfg: &RunConfig) -> Result<(), CliError> {
    let (_, s0) = initial_state(cfg)?;
    let set = bound_set(cfg, &s0)?;
    let dir = &cfg.output.dir;
    output::ensure_dir(dir)?;
    let text = output::bounds_text(&set);
    output::write_text(&file(dir, &cfg.output.bounds_stem, "txt"), &text)?;
    output::write_bounds_csv(&file(dir, &cfg.output.bounds_stem, "csv"), &set)?;
    print!("{text}");
    Ok(())
}

fn repro(name: &str, out: Option<&Path>) -> Result<(), CliError> {
    let mut cfg = preset(name)?;
    if let Some(out) = out {
        cfg.output.dir = out.to_path_buf();
    }
    let sim = simulate(&cfg)?;
    let dir = &cfg.output.dir;
    let mut clipped = Vec::new();
    for t in [0.0, 1.0, 10.0] {
        let (_, state) = sim
            .snapshots
            .iter()
            .find(|(r, _)| *r == t)
            .expect("preset records snapshots at 0, 1 and 10");
        let name = format!("{}_{}_clip.csv", cfg.output.snapshot_stem, time_tag(t));
        output::write_snapshot(&dir.join(&name), state, Some(10.0))?;
        clipped.push(name);
    }
    bounds(&cfg)?;
    let ts_name = sim
        .timeseries
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let files = ReproFiles {
        timeseries: &ts_name,
        snapshots: [&clipped[0], &clipped[1], &clipped[2]],
    };
    let m = repro_manifest(name, &files, &sim.ml_pairs);
    let json = serde_json::to_string_pretty(&m).expect("manifest serializes");
    let path = file(dir, &cfg.output.manifest_stem, "json");
    output::write_text(&path, &(json + "\n"))?;
    println!("wrote {} with {} figures", path.display(), m.figures.len());
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate => simulate(&load_config(cli)?).map(|_| ()),
        Command::Verify => verify(&load_config(cli)?, cli.seed, cli.timing),
        Command::Bounds => bounds(&load_config(cli)?),
        Command::Repro { preset } => repro(preset, cli.out.as_deref()),
    }
}
