use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    qaiccc::cli::init_logging();
    let code = qaiccc::cli::main_with(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
