use std::process::ExitCode;

fn main() -> ExitCode {
    shearseg_cli::run(std::env::args_os())
}
