use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hax_cli::{parse_config, run, CliError, Command};

/// Harmonic metrics of Higgs bundles on the disc: experiments and reports.
#[derive(Parser)]
#[command(name = "hax", version)]
struct Args {
    command: Command,
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. `--set grid.n=64`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

fn workers(configured: usize) -> Result<usize, String> {
    match std::env::var("HAX_WORKERS") {
        Ok(v) => v.trim().parse().map_err(|_| format!("HAX_WORKERS must be a non-negative integer, got '{v}'")),
        Err(_) => Ok(configured),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = (|| -> Result<(), CliError> {
        let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Io {
            path: args.config.display().to_string(),
            message: e.to_string(),
        })?;
        let cfg = parse_config(&text)?.with_overrides(&args.sets)?;
        let n = workers(cfg.experiment.workers).map_err(|m| CliError::Io { path: "HAX_WORKERS".into(), message: m })?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io { path: "worker pool".into(), message: e.to_string() })?;
        pool.install(|| run(args.command, &cfg, &mut std::io::stdout().lock()))
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
