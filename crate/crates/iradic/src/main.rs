use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = iradic::run_command(std::env::args_os());
    // Output is produced in full before anything is written.
    let _ = std::io::stdout()
        .lock()
        .write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr()
        .lock()
        .write_all(outcome.stderr.as_bytes());
    ExitCode::from(u8::try_from(outcome.exit_code).unwrap_or(1))
}
