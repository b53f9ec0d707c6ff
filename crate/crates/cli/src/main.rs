use std::process::ExitCode;

use clap::Parser;
use zdlab_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zdlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
