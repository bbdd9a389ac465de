use std::process::ExitCode;

use clap::Parser;
use segguard_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match run(&cli) {
        Ok(report) => {
            let written = match &out {
                Some(path) => std::fs::write(path, &report.text),
                None => {
                    print!("{}", report.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(1);
            }
            if let Some(note) = &report.note {
                eprintln!("{note}");
            }
            ExitCode::from(report.code)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
