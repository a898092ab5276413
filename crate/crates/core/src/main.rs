use std::process::ExitCode;

fn main() -> ExitCode {
    energetic::cli::main_with_args(std::env::args_os())
}
