use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use mgredist::cli::{out_path, run, Cli, EXIT_CONFIG};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = run(&cli);
    for d in &outcome.diagnostics {
        eprintln!("mgredist: {d}");
    }
    let written = match out_path(&cli) {
        Some(p) => std::fs::write(p, &outcome.output)
            .map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => std::io::stdout()
            .write_all(outcome.output.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("mgredist: {e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    ExitCode::from(outcome.code as u8)
}
