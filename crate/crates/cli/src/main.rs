use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(pistonlab_cli::run(std::env::args_os()) as u8)
}
