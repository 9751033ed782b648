use std::io::Write;
use std::process::ExitCode;

use chsh_cli::config::SEED_ENV;
use chsh_cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_seed = std::env::var(SEED_ENV).ok().filter(|s| !s.trim().is_empty());
    let report = match run(&cli, env_seed.as_deref()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    for (dest, text) in &report.outputs {
        let written = match dest {
            Some(path) => std::fs::write(path, text),
            None => std::io::stdout().lock().write_all(text.as_bytes()),
        };
        if let Err(e) = written {
            eprintln!("error: cannot write output: {e}");
            return ExitCode::from(1);
        }
    }
    if let Some(msg) = report.failure {
        eprintln!("{msg}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
