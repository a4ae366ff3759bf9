use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gammareg_cli::{run, Command, Overrides};

#[derive(Parser)]
#[command(name = "gammareg", version, about = "Gamma regression under linear inequality restrictions")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Fit the requested estimators to a CSV dataset.
    Fit(Overrides),
    /// Run the Monte Carlo study over a (zeta, n, rho) grid.
    Simulate(Overrides),
    /// Goodness of fit, correlation matrix and condition numbers.
    Diagnose(Overrides),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match &cli.command {
        Sub::Fit(f) => (Command::Fit, f),
        Sub::Simulate(f) => (Command::Simulate, f),
        Sub::Diagnose(f) => (Command::Diagnose, f),
    };
    match run(command, flags) {
        Ok(files) => {
            let dir = flags.output.clone();
            println!("{} finished; wrote {}", command.name(), files.join(", "));
            if let Some(d) = dir {
                println!("output directory: {}", d.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
