use std::process::ExitCode;

fn main() -> ExitCode {
    gwseries::correspond::cli_stub()
}
