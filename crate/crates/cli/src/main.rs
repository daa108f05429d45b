use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod output;
mod realize;
mod report;
mod run;
mod setup;
mod verify;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    Ok = 0,
    Failed = 1,
    Parse = 2,
    Infeasible = 3,
    Cap = 4,
}

#[derive(Parser)]
#[command(name = "rarl-kit", version, about = "Realizable abstractions: verification, option synthesis and learning runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check realizability, admissibility or homomorphism of an abstraction.
    Verify(verify::VerifyArgs),
    /// Synthesize an option for one abstract tuple.
    Realize(realize::RealizeArgs),
    /// Learn options with corrections of the abstract model.
    Run(run::RunArgs),
    /// Summarize a run directory.
    Report(report::ReportArgs),
}

fn code_of(err: &anyhow::Error) -> Code {
    use rarl_core::Error;
    match err.downcast_ref::<Error>() {
        Some(Error::Parse { .. }) => Code::Parse,
        Some(Error::IterationCap(_) | Error::EnumerationCap { .. }) => Code::Cap,
        Some(Error::InversionInfeasible { .. }) => Code::Infeasible,
        _ => Code::Failed,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify(a) => verify::cmd_verify(a),
        Command::Realize(a) => realize::cmd_realize(a),
        Command::Run(a) => run::cmd_run(a),
        Command::Report(a) => report::cmd_report(a),
    };
    let code = result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        code_of(&e)
    });
    ExitCode::from(code as u8)
}
