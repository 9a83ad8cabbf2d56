use std::process::ExitCode;

use clap::Parser;
use env_logger::Env;
use treeprune_cli::{error_json, run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(Env::new().filter_or("TREEPRUNE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}
