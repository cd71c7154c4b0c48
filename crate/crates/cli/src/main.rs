use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use portfolio_cli::{run, Cli};

fn main() -> ExitCode {
    let outcome = run(Cli::parse());
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    if !outcome.stderr.is_empty() {
        eprintln!("{}", outcome.stderr);
    }
    ExitCode::from(outcome.code as u8)
}
