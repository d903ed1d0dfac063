//! `geom`: command-line front end for geom-core.
//!
//! Exit status: 0 on success, 1 on a numerical or verification failure,
//! 2 on invalid input.

mod args;
mod commands;
mod json;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{CliResult, Output};

fn run(cli: Cli) -> CliResult<(Output, Option<std::path::PathBuf>)> {
    Ok(match cli.command {
        Command::Info { source } => (commands::info(&commands::load(&source)?)?, None),
        Command::Compute { what, source, point, function } => {
            let spec = commands::load(&source)?;
            (commands::compute(&spec, what, &point, function.as_deref())?, None)
        }
        Command::Geodesic { source, point, velocity, t0, t1, dt, out } => {
            let spec = commands::load(&source)?;
            (commands::geodesic(&spec, &point, &velocity, t0, t1, dt)?, out)
        }
        Command::Transport { source, curve, vector, t0, t1, dt, out } => {
            let spec = commands::load(&source)?;
            (commands::transport(&spec, &curve, &vector, t0, t1, dt)?, out)
        }
        Command::Verify { source, samples, seed, tol, dt, out } => {
            let spec = commands::load(&source)?;
            (commands::verify(&spec, samples, seed, tol, dt)?, out)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = run(cli).and_then(|(out, path)| {
        commands::emit(&out, path.as_deref())?;
        Ok(out.code)
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
