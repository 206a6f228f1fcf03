// SPDX-License-Identifier: Apache-2.0

use std::process::ExitCode;

use clap::Parser;
use tempomux_cli::error::{CliError, EXIT_CONFIG};
use tempomux_cli::{override_env, run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Config(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json("parse"));
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    match run(&cli, &override_env()) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json(cli.command.name()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
