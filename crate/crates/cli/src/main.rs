use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = io::stdout();
    match catspace_cli::run(std::env::args(), &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("catspace: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
