use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;
use wdlab_cli::{parse_config_for, run, Command, ConfigError, RunError};

/// Weakly dissipative shallow-water experiments.
#[derive(Debug, Parser)]
#[command(name = "wdlab", version)]
struct Cli {
    /// simulate, equiv, hs-exact, blowup, converge or dual
    command: Command,
    /// Run configuration (`key = value` lines)
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the configuration
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn config_failure(err: &ConfigError) -> ExitCode {
    let body = json!({ "error": { "kind": "config", "type": err.kind(), "key": err.key(), "message": err.to_string() } });
    eprintln!("{body}");
    ExitCode::from(1)
}

fn runtime_failure(err: &RunError) -> ExitCode {
    eprintln!("{}", json!({ "error": { "kind": "runtime", "message": err.to_string() } }));
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": { "kind": "usage", "message": e.to_string() } }));
            return ExitCode::from(1);
        }
    };
    let text = match fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            let message = format!("{}: {e}", cli.config.display());
            eprintln!("{}", json!({ "error": { "kind": "config", "type": "ReadError", "message": message } }));
            return ExitCode::from(1);
        }
    };
    let mut config = match parse_config_for(&text, Some(cli.command)) {
        Ok(c) => c,
        Err(e) => return config_failure(&e),
    };
    if let Some(dir) = cli.output_dir {
        config.output_dir = dir.to_string_lossy().into_owned();
    }
    match run(&config, config.output_dir.as_ref()) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string(&outcome.status).expect("status serializes"));
            ExitCode::SUCCESS
        }
        Err(e) => runtime_failure(&e),
    }
}
