use std::io::Write;
use std::process::ExitCode;

use bellrank::cli::Cli;
use bellrank::commands;
use bellrank::error::CliError;
use clap::error::ErrorKind;
use clap::Parser;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            return fail(&CliError::Usage(message.trim_end().to_string()));
        }
    };
    match commands::run(&cli) {
        Ok(out) => {
            if !cli.quiet {
                let mut stdout = std::io::stdout().lock();
                let _ = stdout.write_all(out.report.to_json().as_bytes());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    let obj = e.to_object();
    let json = serde_json::to_string(&obj).expect("error object serializes");
    eprintln!("{json}");
    ExitCode::from(e.exit_code() as u8)
}
