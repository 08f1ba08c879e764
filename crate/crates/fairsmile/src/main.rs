use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(fairsmile::cli::main() as u8)
}
