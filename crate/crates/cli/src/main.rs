mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn run(cli: &Cli) -> Result<(), commands::CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| commands::CliError::Input(format!("--jobs: {e}")))?;
    }
    match &cli.command {
        Command::Series(a) => commands::series(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Classify(a) => commands::classify(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Bstar(a) => commands::bstar(a),
        Command::Fit(a) => commands::fit(a),
        Command::Mg(a) => commands::mg(a),
        Command::MgBifurcation(a) => commands::mg_bifurcation_cmd(a),
        Command::Table1(a) => commands::table1(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(argv) => argv,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(argv);
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {} failed: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
