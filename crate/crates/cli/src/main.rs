mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::config::{Cli, CliCommand, Command, RunConfig, SCHEMA_VERSION};
use crate::error::CliError;
use crate::output::Artifacts;

const THREADS_ENV: &str = "FLOWOUT_THREADS";

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::config(THREADS_ENV, format!("expected a thread count, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(THREADS_ENV, e.to_string()))
}

fn run(cfg: &RunConfig) -> Result<commands::Report, CliError> {
    config::validate(&cfg.command)?;
    let mut out = Artifacts::create(&cfg.output_dir)?;
    let report = match &cfg.command {
        Command::Flow(a) => commands::flow(a, &mut out),
        Command::Glancing(a) => commands::glancing(a, &mut out),
        Command::Classify(a) => commands::classify(a, &mut out),
        Command::Density(a) => commands::density(a, &mut out),
        Command::Evaluate(a) => commands::evaluate(a, &mut out),
        Command::Transition(a) => commands::transition(a, &mut out),
        Command::VerifyAll(a) => commands::verify_all(a, cfg.seed, &mut out),
    }?;
    out.finish(cfg)?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| {
        let cfg = match cli.command {
            CliCommand::Run { config } => config::load(&config)?,
            CliCommand::Direct(command) => RunConfig {
                schema_version: SCHEMA_VERSION,
                output_dir: cli.out.clone(),
                seed: cli.seed,
                command,
            },
        };
        let name = cfg.command.name();
        run(&cfg).map(|r| (name, cfg.output_dir.clone(), r))
    });
    match result {
        Ok((name, dir, report)) => {
            if cli.json {
                let s = serde_json::json!({
                    "command": name,
                    "status": "ok",
                    "output_dir": dir,
                    "result": report.summary,
                });
                println!("{}", serde_json::to_string_pretty(&s).expect("serializable"));
            } else {
                println!("{}", report.text);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if cli.json {
                let s = serde_json::json!({"status": "error", "exit_code": e.exit_code(), "error": e.to_string()});
                println!("{}", serde_json::to_string_pretty(&s).expect("serializable"));
            }
            eprintln!("flowout: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
