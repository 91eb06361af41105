use std::process::ExitCode;

use clap::Parser;
use nsac::cli::{execute, Cli};

fn main() -> ExitCode {
    ExitCode::from(execute(Cli::parse()) as u8)
}
