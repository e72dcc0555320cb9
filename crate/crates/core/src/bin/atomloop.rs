use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    atomloop::cli::init_logging();
    let code = atomloop::cli::run(
        std::env::args_os(),
        &mut io::stdin().lock(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    ExitCode::from(code as u8)
}
