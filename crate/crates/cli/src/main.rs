//! `loove` command-line tool.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 bad input data,
//! 4 internal error.

mod args;
mod commands;
mod context;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use context::{CliResult, Ctx};

fn run(cli: Cli) -> CliResult<()> {
    if let Command::Verify(a) = cli.command {
        return commands::verify(a);
    }
    let ctx = Ctx::new(&cli)?;
    match cli.command {
        Command::Corpus(c) => commands::corpus(&ctx, c),
        Command::Tokenize(a) => commands::tokenize_cmd(&ctx, a),
        Command::Features(a) => commands::features(&ctx, a),
        Command::Train(a) => commands::train(&ctx, a),
        Command::Eval(a) => commands::eval(&ctx, a),
        Command::Embed(c) => commands::embed(&ctx, c),
        Command::Pseudodict(c) => commands::pseudodict(&ctx, c),
        Command::Loove(c) => commands::loove_cmd(&ctx, c),
        Command::Analyze(c) => commands::analyze(&ctx, c),
        Command::Grid(c) => commands::grid(&ctx, c),
        Command::Verify(_) => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
