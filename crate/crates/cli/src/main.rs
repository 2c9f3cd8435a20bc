use std::process::ExitCode;

use clap::Parser;
use fractune_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(run) => {
            for w in run.warnings() {
                eprintln!("warning: {w}");
            }
            for p in run.written() {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
