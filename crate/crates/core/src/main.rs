use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(uolab::cli::main_with(std::env::args_os()))
}
