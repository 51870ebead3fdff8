//! `prodspec` command-line front end.

mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl From<prodspec::Error> for CliError {
    fn from(e: prodspec::Error) -> Self {
        match e {
            prodspec::Error::Numeric(_) => CliError::Numeric(e.to_string()),
            prodspec::Error::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Outcome of a command that ran to completion.
pub enum Verdict {
    Done,
    Pass,
    Fail,
}

fn run() -> Result<Verdict, (CliError, u8)> {
    let raw: Vec<_> = std::env::args_os().collect();
    let argv = config::splice_config(raw).map_err(|m| (CliError::Usage(m), 2))?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| {
            (
                CliError::Usage(format!("cannot start {} threads: {e}", cli.threads)),
                2,
            )
        })?;
    let result = pool.install(|| match &cli.command {
        Command::Sample(a) => commands::sample(&cli, a),
        Command::Limit(a) => commands::limit(&cli, a),
        Command::Validate(a) => commands::validate(&cli, a),
        Command::Kstest(a) => commands::kstest(&cli, a),
        Command::Kernel(a) => commands::kernel(&cli, a),
    });
    result.map_err(|e| {
        let code = match e {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        };
        (e, code)
    })
}

fn main() -> ExitCode {
    match run() {
        Ok(Verdict::Done | Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err((e, code)) => {
            match e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Numeric(m) => eprintln!("numeric error: {m}"),
                CliError::Io(m) => eprintln!("i/o error: {m}"),
            }
            ExitCode::from(code)
        }
    }
}
