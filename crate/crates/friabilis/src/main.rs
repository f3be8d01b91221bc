use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use friabilis::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("friabilis: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
