use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(relay_secrecy::cli::run(std::env::args_os()))
}
