mod cli;
mod cmd;
mod config;
mod failure;
mod manifest;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::cli::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.quiet);
    let result = match &cli.command {
        Command::SnrCurve(a) => cmd::curve::run(a, cli.manifest.as_deref()),
        Command::FadingGen(a) => cmd::fading::run(a, cli.manifest.as_deref()),
        Command::Chsim(a) => cmd::chsim::run(a, cli.manifest.as_deref()),
        Command::FmBaseline(a) => cmd::baseline::run_fm(a, cli.manifest.as_deref()),
        Command::Papr(a) => cmd::baseline::run_papr(a, cli.manifest.as_deref()),
        Command::Frame(a) => cmd::modem::run_frame(a, cli.manifest.as_deref()),
        Command::Deframe(a) => cmd::modem::run_deframe(a, cli.manifest.as_deref()),
        Command::ModemLoop(a) => cmd::modem::run_loop(a, cli.manifest.as_deref()),
        Command::Golden(a) => cmd::golden::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", failure::error_line(&e));
            ExitCode::FAILURE
        }
    }
}

fn init_logging(quiet: bool) {
    let default = if quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default))
        .format(|buf, record| {
            writeln!(
                buf,
                "{} {} {}",
                record.level().as_str().to_lowercase(),
                record.target(),
                record.args()
            )
        })
        .init();
}
