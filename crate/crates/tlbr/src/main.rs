use std::process::ExitCode;

use clap::Parser;
use tlbr::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("tlbr: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
