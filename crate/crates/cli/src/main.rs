use std::process::ExitCode;

use clap::Parser;
use ptwigner_cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = RunConfig::from_cli(cli).and_then(|config| run(&config));
    match outcome {
        Ok(done) => {
            println!("wrote {} rows to {}", done.rows, done.output.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
