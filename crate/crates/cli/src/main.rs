use std::process::ExitCode;

use clap::{Parser, Subcommand};

use regenstab_cli::{run, validate, CliError, RunArgs};

/// Mean stability of linear systems under regenerative switching.
#[derive(Parser)]
#[command(name = "regenstab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a task and write report.txt plus the task's CSV files.
    Run(RunArgs),
    /// Check a configuration and print the assumption pre-check.
    Validate(RunArgs),
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let cfg = match args.resolve() {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            match run(&cfg) {
                Ok(out) => {
                    print!("{}", out.report.to_text());
                    for f in &out.files {
                        println!("wrote: {}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Validate(args) => {
            let cfg = match args.resolve() {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            let v = validate(&cfg);
            if let Some(a) = &v.assumptions {
                print!("{a}");
            }
            if v.is_ok() {
                println!("config: ok");
                ExitCode::SUCCESS
            } else {
                for i in &v.issues {
                    println!("{i}");
                }
                let code = CliError::Invalid(v.issues).exit_code();
                ExitCode::from(code as u8)
            }
        }
    }
}
