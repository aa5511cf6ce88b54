use std::process::ExitCode;

use ising_traj_cli::{run, CliError};

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            ExitCode::from(if e.use_stderr() { ising_traj_cli::EXIT_USAGE as u8 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
