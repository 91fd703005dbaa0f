use std::process::ExitCode;

fn main() -> ExitCode {
    grandmorrey_cli::run(std::env::args_os())
}
