use std::process::ExitCode;

fn main() -> ExitCode {
    anigrowth::cli::main()
}
