use std::process::ExitCode;

fn main() -> ExitCode {
    ptmc::cli::run()
}
