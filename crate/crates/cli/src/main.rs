use std::io;
use std::process::ExitCode;

use clap::Parser;
use tubepulse_cli::args::Cli;
use tubepulse_cli::{run, Io};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let (mut stdout, mut stdin) = (io::stdout().lock(), io::stdin().lock());
    let mut io = Io {
        out: &mut stdout,
        input: &mut stdin,
    };
    match run(cli, &mut io) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
