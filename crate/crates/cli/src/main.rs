use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod error;
mod files;
mod manifest;
mod params;

use args::Cli;
use error::CliError;
use params::Params;

fn run(cli: Cli) -> Result<commands::Outcome, CliError> {
    let config = match &cli.config {
        Some(p) => Params::load(p)?,
        None => Params::default(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::usage("--jobs must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::usage(e.to_string()))?;
    pool.install(|| commands::run(cli.command, &config))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", CliError::usage(e.kind().to_string() + ": " + e.render().to_string().trim()).to_json());
            return ExitCode::from(error::EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(outcome) => {
            if let Some(v) = outcome.stdout {
                println!("{}", serde_json::to_string_pretty(&v).expect("report serializes"));
            }
            for f in &outcome.failures {
                eprintln!("{}", f.to_json());
            }
            match outcome.failures.first() {
                Some(f) => ExitCode::from(f.code),
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code)
        }
    }
}
