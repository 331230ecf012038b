use std::process::ExitCode;

fn main() -> ExitCode {
    gkpca_cli::main_from(std::env::args_os())
}
