use std::process::ExitCode;

use clap::Parser;
use fedosov::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if let Some(path) = &outcome.out {
                if let Err(e) = std::fs::write(path, &outcome.text) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            } else {
                print!("{}", outcome.text);
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
