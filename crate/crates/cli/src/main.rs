use std::io::Write;
use std::process::ExitCode;

use qlbn_cli::CliError;

fn main() -> ExitCode {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match qlbn_cli::run(std::env::args_os(), &mut out) {
        Ok(()) => {
            let _ = out.flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            let _ = out.flush();
            match &e {
                CliError::Usage(msg) => eprint!("{msg}"),
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
