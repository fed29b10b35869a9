use std::process::ExitCode;

fn main() -> ExitCode {
    let cmd = match levylab_cli::parse_args(std::env::args_os()) {
        Ok(cmd) => cmd,
        Err(e) => e.exit(),
    };
    match levylab_cli::run(&cmd) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
