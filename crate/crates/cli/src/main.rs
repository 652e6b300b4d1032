use std::panic;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use heartid_cli::args::Cli;
use heartid_cli::error::exit;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::from(exit::OK),
                _ => ExitCode::from(exit::USAGE),
            };
        }
    };
    match panic::catch_unwind(|| heartid_cli::run(cli)) {
        Ok(Ok(())) => ExitCode::from(exit::OK),
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        // the panic message was already printed by the default hook
        Err(_) => ExitCode::from(exit::INTERNAL),
    }
}
