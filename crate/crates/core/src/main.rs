use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(qgroup_lab::cli::main_from_env())
}
