//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for argument, parse or validation errors,
//! 2 for runtime failures.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qnn_core::config::{parse_config_with_overrides, parse_override, ConfigError, ExperimentConfig};
use qnn_core::experiment::{run_experiment, run_sweep, RunError};

#[derive(Parser)]
#[command(name = "qnn", version, about = "Qubit-neuron lattice simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write timeseries, analysis and report files.
    Run(Common),
    /// Run one experiment per coupling value and write a periods table.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated coupling values, e.g. 0.005,0.01,0.02
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
    },
    /// Print the fully expanded configuration without running it.
    Config(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration document (flat `key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Figure preset (Fig1 … Fig6); overrides a preset in the document.
    #[arg(long)]
    preset: Option<String>,
    /// Override one key, e.g. --set model.epsilon=0.02 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Seed for random interior initialization.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads inside each run.
    #[arg(long)]
    threads: Option<usize>,
    /// Also write a gnuplot script next to the CSV files.
    #[arg(long)]
    plot_script: bool,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        let text = match &self.config {
            Some(path) => fs::read_to_string(path).map_err(|source| {
                CliError::Usage(format!("cannot read {}: {source}", path.display()))
            })?,
            None => String::new(),
        };
        let mut overrides = Vec::new();
        if let Some(p) = &self.preset {
            overrides.push(("preset".to_string(), p.clone()));
        }
        for o in &self.overrides {
            overrides.push(parse_override(o)?);
        }
        if let Some(dir) = &self.output_dir {
            overrides.push(("output_dir".to_string(), dir.display().to_string()));
        }
        if let Some(seed) = self.seed {
            overrides.push(("init.seed".to_string(), seed.to_string()));
        }
        if let Some(t) = self.threads {
            overrides.push(("threads".to_string(), t.to_string()));
        }
        if self.plot_script {
            overrides.push(("output.plot_script".to_string(), "true".to_string()));
        }
        Ok(parse_config_with_overrides(&text, &overrides)?)
    }
}

enum CliError {
    Usage(String),
    Run(RunError),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(c) => c.into(),
            other => CliError::Run(other),
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(common) => {
            let config = common.load()?;
            let report = run_experiment(&config)?;
            print!("{}", report.to_text());
        }
        Command::Sweep { common, epsilons } => {
            let config = common.load()?;
            let epsilons = epsilons.unwrap_or_else(|| config.sweep_epsilons.clone());
            if epsilons.is_empty() {
                return Err(CliError::Usage(
                    "no coupling values: pass --epsilons or set sweep.epsilons".into(),
                ));
            }
            let report = run_sweep(&config, &epsilons)?;
            print!("{}", report.to_text());
        }
        Command::Config(common) => {
            print!("{}", common.load()?.to_document());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
