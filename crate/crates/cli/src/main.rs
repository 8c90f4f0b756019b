mod args;
mod run;

use clap::Parser;

use args::Cli;
use run::{execute, load_config, Failure};

fn main() {
    init_thread_pool();
    let cli = Cli::parse();
    let command = match (cli.config, cli.command) {
        (Some(_), Some(_)) => Err(Failure::Usage(
            "--config replaces the subcommand; give one or the other".into(),
        )),
        (Some(path), None) => load_config(&path),
        (None, Some(cmd)) => Ok(cmd),
        (None, None) => Err(Failure::Usage(
            "a subcommand or --config PATH is required (see --help)".into(),
        )),
    };
    let result = command.and_then(execute);
    if let Err(failure) = result {
        eprintln!("error: {}", failure.message());
        std::process::exit(failure.exit_code());
    }
}

/// RUIN_LAB_THREADS caps the worker count; 0 or unset means automatic.
fn init_thread_pool() {
    if let Ok(text) = std::env::var("RUIN_LAB_THREADS") {
        if let Ok(threads) = text.trim().parse::<usize>() {
            if threads > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
            }
        }
    }
}
