use std::process::ExitCode;

use clap::Parser;
use seqpar_cli::{run, Cli, Context};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Context::from_env().and_then(|ctx| run(&cli, &ctx, &mut std::io::stdout().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("seqpar: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
