use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let result = conic_sigma2::cli::run(std::env::args_os());
    let mut out = std::io::stdout().lock();
    // A closed pipe is not an error worth reporting.
    let _ = writeln!(out, "{}", result.payload.trim_end());
    ExitCode::from(result.exit_code as u8)
}
