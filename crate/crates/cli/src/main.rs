//! `noonsim`: runs double-well NOON-state experiments and writes CSV/JSON
//! artifacts.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration,
//! 3 numerical failure.

mod config;
mod failure;
mod output;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use toml::{Table, Value};

use config::{ExperimentConfig, Preset, Scenario};
use failure::Failure;
use noonsim::FrequencyUnits;
use output::RunDir;

#[derive(Parser)]
#[command(
    name = "noonsim",
    version,
    about = "Double-well condensate NOON-state experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Imaginary-time ground states over a list of U/kappa values.
    GroundState(Overrides),
    /// Linear interaction ramps and the fidelity-vs-ramp-time sweep.
    Ramp(Overrides),
    /// Ramsey fringes over a theta grid.
    Ramsey(Overrides),
    /// Parity-fringe spectrum and coherence decomposition.
    Coherence(Overrides),
    /// Interaction rate from trap and scattering-length parameters.
    EstimateU(Overrides),
    /// Run a figure preset (FIG1..FIG8).
    Preset {
        #[arg(value_enum, ignore_case = true)]
        id: Preset,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run whatever scenario a config file names (TOML, or a previous summary.json).
    Run(Overrides),
}

#[derive(Args, Default)]
struct Overrides {
    /// TOML config file, or a summary.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any config key, e.g. `--set ramp.ramp_times=[0.5,4]`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Atom numbers, comma separated.
    #[arg(long, value_delimiter = ',')]
    atoms: Option<Vec<i64>>,
    /// Tunneling rate (rad/s).
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<f64>,
    #[arg(long)]
    mass_amu: Option<f64>,
    /// Trap frequencies "wx,wy,wz".
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    omega: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    omega_units: Option<Units>,
    /// Scattering lengths in Bohr radii, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    scattering_length_a0: Option<Vec<f64>>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Units {
    Angular,
    Hertz,
}

fn float_array(values: &[f64]) -> Value {
    Value::Array(values.iter().map(|&v| Value::Float(v)).collect())
}

impl Overrides {
    fn apply(&self, table: &mut Table) -> Result<(), Failure> {
        for s in &self.sets {
            config::apply_set(table, s)?;
        }
        let mut set = |path: &str, v: Value| config::set_path(table, path, v);
        if let Some(dir) = &self.output_dir {
            set("output_dir", Value::String(dir.display().to_string()))?;
        }
        if let Some(atoms) = &self.atoms {
            set(
                "system.atoms",
                Value::Array(atoms.iter().map(|&n| Value::Integer(n)).collect()),
            )?;
        }
        if let Some(k) = self.kappa {
            set("system.kappa", Value::Float(k))?;
        }
        if let Some(m) = self.mass_amu {
            set("physical.mass_amu", Value::Float(m))?;
        }
        if let Some(w) = &self.omega {
            if w.len() != 3 {
                return Err(Failure::validation(
                    "--omega expects three values \"wx,wy,wz\"",
                ));
            }
            set("physical.omega", float_array(w))?;
        }
        if let Some(u) = self.omega_units {
            let units = match u {
                Units::Angular => FrequencyUnits::Angular,
                Units::Hertz => FrequencyUnits::Hertz,
            };
            set(
                "physical.omega_units",
                Value::try_from(units).expect("enum serializes"),
            )?;
        }
        if let Some(a) = &self.scattering_length_a0 {
            set("physical.scattering_length_a0", float_array(a))?;
        }
        Ok(())
    }
}

fn resolve(command: &Command) -> Result<ExperimentConfig, Failure> {
    let (scenario, preset, overrides) = match command {
        Command::GroundState(o) => (Some(Scenario::GroundState), None, o),
        Command::Ramp(o) => (Some(Scenario::Ramp), None, o),
        Command::Ramsey(o) => (Some(Scenario::RamseySweep), None, o),
        Command::Coherence(o) => (Some(Scenario::CoherenceAnalysis), None, o),
        Command::EstimateU(o) => (Some(Scenario::EstimateU), None, o),
        Command::Preset { id, overrides } => (None, Some(*id), overrides),
        Command::Run(o) => (None, None, o),
    };
    let mut table = match preset {
        Some(p) => config::to_table(&config::preset_config(p)),
        None => Table::new(),
    };
    match &overrides.config {
        Some(path) => config::merge(&mut table, config::read_config_file(path)?),
        None if matches!(command, Command::Run(_)) => {
            return Err(Failure::validation("`run` requires --config"));
        }
        None => {}
    }
    if let Some(s) = scenario {
        table.insert(
            "scenario".into(),
            Value::try_from(s).expect("enum serializes"),
        );
    }
    overrides.apply(&mut table)?;
    config::from_table(table)
}

fn run(config: &ExperimentConfig) -> Result<PathBuf, Failure> {
    let start = Instant::now();
    let mut out = RunDir::create(&config.output_dir, config.run_label())?;
    let report = scenarios::execute(config, &mut out)?;
    let resolved = toml::to_string(config).map_err(|e| Failure::Io(e.to_string()))?;
    out.write_text("config.toml", &resolved)?;
    let summary = json!({
        "config": config,
        "results": report.results,
        "notes": report.notes,
        "files": out.files(),
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Failure::Io(e.to_string()))?;
    out.write_text("summary.json", &text)?;
    Ok(out.root().to_path_buf())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = resolve(&cli.command).and_then(|c| run(&c));
    match outcome {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
