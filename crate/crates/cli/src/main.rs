mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::UsageError;

fn run(cli: &Cli) -> anyhow::Result<()> {
    let text = match &cli.command {
        Command::TwoNode(a) => commands::two_node(a)?,
        Command::ThreeNode(a) => commands::three_node(a)?,
        Command::Oracle(a) => commands::oracle(a)?,
        Command::Entropy(a) => commands::entropy(a)?,
        Command::Sweep(a) => return commands::sweep_cmd(a),
        Command::Simulate(a) => return commands::simulate(a),
    };
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
