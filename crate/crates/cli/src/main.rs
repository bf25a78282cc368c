use std::process::ExitCode;

use clap::Parser;
use metrofi_cli::cli::Cli;
use metrofi_cli::error::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli
        .plan()
        .and_then(|plan| metrofi_cli::execute(&plan).map(|o| (plan, o)))
    {
        Ok((plan, outcome)) => {
            for a in &outcome.artifacts {
                println!("wrote {}", plan.out.join(&a.name).display());
            }
            println!(
                "wrote {}",
                plan.out.join(format!("{}.json", outcome.stem)).display()
            );
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if !outcome.warnings.is_empty() {
                eprintln!("{} warning(s)", outcome.warnings.len());
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    e.exit_code()
}
