use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use twophoton::materials::MaterialCatalog;
use twophoton_cli::{run_experiment, validate, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "twophoton", version, about = "Simulate two-photon interference experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Write outputs here instead of the configured directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Inspect the material catalog (TWOPHOTON_MATERIALS overrides the bundled one).
    Materials {
        #[command(subcommand)]
        action: MaterialsAction,
    },
}

#[derive(Subcommand)]
enum MaterialsAction {
    List,
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    RunConfig::from_json(&text)
}

fn catalog() -> Result<MaterialCatalog, CliError> {
    MaterialCatalog::from_env_or_bundled().map_err(|e| CliError::config("TWOPHOTON_MATERIALS", e))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out_dir } => {
            let cfg = load(&config)?;
            let out = run_experiment(&cfg, &catalog()?, out_dir.as_deref())?;
            println!("{}", out.csv_path.display());
            println!("{}", out.summary_path.display());
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            validate(&cfg, &catalog()?)?;
            println!("{}: ok ({})", config.display(), cfg.experiment.name());
        }
        Command::Materials {
            action: MaterialsAction::List,
        } => {
            for m in catalog()?.iter() {
                let (lo, hi) = m.valid_range();
                let n = m
                    .refractive_index(702e-9)
                    .map_or_else(|_| "-".to_string(), |n| format!("{n:.5}"));
                println!("{:<16} {:>8.1}-{:<8.1} nm  n(702 nm) = {n}", m.name, lo * 1e9, hi * 1e9);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twophoton: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
