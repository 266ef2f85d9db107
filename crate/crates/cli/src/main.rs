use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use log::warn;

use dampo_cli::args::Cli;
use dampo_cli::commands;

fn configure_threads() {
    let Ok(value) = std::env::var("DAMPO_THREADS") else { return };
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                warn!("could not size the thread pool: {e}");
            }
        }
        _ => warn!("ignoring DAMPO_THREADS = {value:?}: expected a positive integer"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = commands::run(&cli, &mut out);
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dampo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
