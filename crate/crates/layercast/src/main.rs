use std::process::ExitCode;

use clap::Parser;
use layercast::{table, Cli, EXIT_TOLERANCE_BREACH};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let arguments: Vec<String> = std::env::args().skip(1).collect();
    let outcome = match layercast::run(&cli, arguments) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let common = match &cli.command {
        layercast::args::Command::Solve(a) => &a.common,
        layercast::args::Command::Sweep(a) => &a.common,
        layercast::args::Command::PowerDist(a) => &a.common,
        layercast::args::Command::Compare(a) => &a.common,
    };
    if let Err(e) = table::emit(&outcome.report, &outcome.manifest, common.format, common.out.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    if !outcome.breaches.is_empty() {
        for b in &outcome.breaches {
            eprintln!("check failed: {b}");
        }
        return ExitCode::from(EXIT_TOLERANCE_BREACH as u8);
    }
    ExitCode::SUCCESS
}
