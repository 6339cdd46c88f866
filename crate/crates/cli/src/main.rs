use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rotodiff::{run_scenario, schema, CliError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "rotodiff", version, about = "Angular momentum diffusion of rigid rotors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its result files.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Worker threads; falls back to ROTODIFF_THREADS, then to all cores.
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a configuration without running it.
    Validate { config: PathBuf },
    /// Print the configuration JSON schema.
    Schema,
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("ROTODIFF_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("ROTODIFF_THREADS must be a thread count, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            out,
            threads: n,
            seed,
        } => {
            let cfg = ScenarioConfig::load(&config)?;
            if let Some(n) = threads(n)? {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| CliError::Config(e.to_string()))?;
            }
            let report = run_scenario(&cfg, &out, seed)?;
            for f in &report.files {
                println!("{}", f.display());
            }
        }
        Command::Validate { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&cfg.canonical()).expect("JSON serializes")
            );
        }
        Command::Schema => println!("{}", serde_json::to_string_pretty(&schema()).expect("JSON serializes")),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
