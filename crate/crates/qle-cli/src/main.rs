use std::process::ExitCode;

use clap::Parser;
use qle_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli.command, &cli.opts) {
        Ok(outcome) => {
            let text = outcome.render(cli.opts.format);
            match &cli.opts.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("error: {path}: {e}");
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
