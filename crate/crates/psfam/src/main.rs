use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(psfam::cli::run())
}
