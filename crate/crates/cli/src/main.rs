use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    if let Err(e) = tetrascope_cli::configure_threads() {
        eprintln!("error: {}", e.message);
        return ExitCode::from(e.exit_code() as u8);
    }
    let code = tetrascope_cli::main_with_args(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr());
    ExitCode::from(code as u8)
}
