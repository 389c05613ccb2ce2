//! `mqc`: compile circuits to measurement-only programs, run and verify
//! them, and reproduce the model's statistics as JSON reports.

mod args;
mod commands;
mod error;

use clap::Parser;

use args::{Cli, Command};
use error::{CliResult, ExitCode};

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Compile(a) => commands::cmd_compile(a),
        Command::Run(a) => commands::cmd_run(a),
        Command::Verify(a) => commands::cmd_verify(a),
        Command::Stats(a) => commands::cmd_stats(a),
        Command::Acn(a) => commands::cmd_acn(a),
        Command::Walk(a) => commands::cmd_walk(a),
        Command::Usq(a) => commands::cmd_usq(a),
    }
}

fn main() -> std::process::ExitCode {
    // clap exits with status 2 on its own usage errors.
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => std::process::ExitCode::from(ExitCode::OK.0),
        Err(e) => {
            eprintln!("mqc: {e}");
            std::process::ExitCode::from(e.exit_code().0)
        }
    }
}
