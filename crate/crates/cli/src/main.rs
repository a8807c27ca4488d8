mod args;
mod commands;
mod config;
mod failure;
mod input;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use liftcode::parallel::with_workers;

use args::{Cli, Command};
use commands::Output;
use config::FileConfig;
use failure::Failure;

fn run(cli: Cli) -> Result<u8, Failure> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let workers = cli.workers.or(file.workers);
    if workers == Some(0) {
        return Err(liftcode::Error::InvalidArgument("workers must be at least 1".into()).into());
    }
    with_workers(workers, move || match cli.command {
        Command::Construct(a) => {
            let out = Output::new(a.out.clone(), workers);
            commands::construct(a, &file, out)
        }
        Command::Analyze(a) => {
            let out = Output::new(a.out.clone(), workers);
            commands::analyze(a, &file, out)
        }
        Command::Simulate(a) => {
            let out = Output::new(a.out.clone(), workers);
            commands::simulate(a, &file, out)
        }
        Command::Compare(a) => {
            let out = Output::new(a.out.clone(), workers);
            commands::compare(a, &file, out)
        }
        Command::Export(a) => {
            let out = Output::new(a.out.clone(), workers);
            commands::export(a, out)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            if std::env::args().any(|a| a == "--json-errors") {
                let doc = serde_json::json!({
                    "error": { "kind": "usage", "exit_code": 2, "message": e.to_string().trim_end() }
                });
                eprintln!("{doc}");
                return ExitCode::from(2);
            }
            e.exit()
        }
    };
    let json_errors = cli.json_errors;
    match run(cli) {
        Ok(status) => ExitCode::from(status),
        Err(f) => {
            if json_errors {
                eprintln!("{}", f.to_json());
            } else {
                eprintln!("liftcode: {f}");
            }
            ExitCode::from(f.exit_code())
        }
    }
}
