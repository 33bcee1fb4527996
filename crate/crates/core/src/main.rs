use std::process::ExitCode;

use clap::Parser;
use tierwave::cli::{exit_code, main_with, Args};

fn main() -> ExitCode {
    match main_with(Args::parse()) {
        Ok(out) => {
            for (path, rows) in out.files {
                println!("wrote {} ({rows} rows)", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("tierwave: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
