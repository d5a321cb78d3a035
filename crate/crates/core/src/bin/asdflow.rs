use std::path::PathBuf;
use std::process::ExitCode;

fn main() -> ExitCode {
    let env_out = std::env::var_os(asdflow::cli::OUT_ENV).map(PathBuf::from);
    let code = asdflow::cli::run(
        std::env::args(),
        env_out,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code as u8)
}
