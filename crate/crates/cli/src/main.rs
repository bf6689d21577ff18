mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{ConfigError, Draft};
use relay_bf::harness::{preset, run_experiment, ExperimentSpec, PRESETS};
use relay_bf::Scheme;

#[derive(Parser)]
#[command(
    name = "relaybf",
    version,
    about = "Monte Carlo sweeps for robust MIMO relay beamforming"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a config file and overrides.
    Run(Opts),
    /// Run one of the figure presets.
    Preset {
        /// fig2 .. fig7
        name: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Check a configuration without running it.
    Validate(Opts),
    /// List scheme names.
    ListSchemes,
}

#[derive(Args, Clone)]
struct Opts {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set snr_fc_db=30`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Comma-separated scheme list.
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Failure classes, each with its own exit status.
enum Failure {
    UnknownScheme(String),
    UnknownPreset(String),
    Parse(String),
    Invalid(String),
    Output(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::UnknownScheme(_) => 3,
            Failure::UnknownPreset(_) => 4,
            Failure::Parse(_) => 5,
            Failure::Invalid(_) => 6,
            Failure::Output(_) => 7,
            Failure::Numeric(_) => 8,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::UnknownScheme(m)
            | Failure::UnknownPreset(m)
            | Failure::Parse(m)
            | Failure::Invalid(m)
            | Failure::Output(m)
            | Failure::Numeric(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Parse(m) => Failure::Parse(m),
            ConfigError::UnknownScheme(m) => Failure::UnknownScheme(m),
        }
    }
}

fn build(mut draft: Draft, opts: &Opts) -> Result<ExperimentSpec, Failure> {
    if let Some(path) = &opts.config {
        draft.apply_file(path)?;
    }
    for pair in &opts.sets {
        draft.apply_override(pair)?;
    }
    if let Some(list) = &opts.schemes {
        draft.set_schemes(list)?;
    }
    let mut spec = draft.finish();
    if let Some(t) = opts.trials {
        spec.trials = t;
    }
    if let Some(s) = opts.seed {
        spec.master_seed = s;
    }
    spec.validate().map_err(|e| Failure::Invalid(e.to_string()))?;
    Ok(spec)
}

fn execute(label: &str, spec: &ExperimentSpec, opts: &Opts) -> Result<(), Failure> {
    let start = Instant::now();
    let table = run_experiment(spec).map_err(|e| Failure::Numeric(e.to_string()))?;
    let text = match opts.format {
        Format::Csv => table.to_csv(),
        Format::Json => output::to_json(label, spec, &table),
    };
    match &opts.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::Output(format!("cannot write {}: {e}", path.display())))?
        }
        None => print!("{text}"),
    }
    let series = spec.schemes.len() * spec.branches.len().max(1);
    eprintln!(
        "{label}: {} grid points x {series} series, {} trials each, {:.2} s wall",
        spec.sweep_values.len(),
        spec.trials,
        start.elapsed().as_secs_f64()
    );
    let empty: Vec<String> = table
        .rows
        .iter()
        .filter(|r| r.trials == 0)
        .map(|r| {
            format!(
                "{} at {}: {}",
                r.scheme,
                r.sweep_value,
                r.failure.as_deref().unwrap_or("no trials")
            )
        })
        .collect();
    if empty.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numeric(format!("every trial failed for {}", empty.join("; "))))
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(opts) => {
            let spec = build(Draft::blank(), &opts)?;
            execute("run", &spec, &opts)
        }
        Command::Preset { name, opts } => {
            let base = preset(&name).map_err(|e| Failure::UnknownPreset(e.to_string()))?;
            let spec = build(Draft::from_preset(base), &opts)?;
            execute(&name, &spec, &opts)
        }
        Command::Validate(opts) => {
            let spec = build(Draft::blank(), &opts)?;
            println!(
                "ok: {} sweep over {} points, schemes {}",
                spec.sweep_axis,
                spec.sweep_values.len(),
                spec.schemes.iter().map(|s| s.name()).collect::<Vec<_>>().join(",")
            );
            Ok(())
        }
        Command::ListSchemes => {
            for s in Scheme::ALL {
                println!(
                    "{}\t{}",
                    s.name(),
                    if s.single_relay_only() {
                        "single relay"
                    } else {
                        "any relay count"
                    }
                );
            }
            println!("presets: {}", PRESETS.join(", "));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
