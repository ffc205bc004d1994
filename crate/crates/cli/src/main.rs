use std::process::ExitCode;

use clap::Parser;
use kirchhoff::args::{resolve, Cli};
use kirchhoff::report::Status;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.downcast_ref::<kirchhoff::Error>().map_or(1, |k| k.exit_code());
            ExitCode::from(code as u8)
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<u8> {
    let (kind, cfg) = resolve(cli.command)?;
    let outcome = kirchhoff::run(kind, &cfg)?;
    println!("{}", outcome.summary);
    for gate in outcome.gates.iter().filter(|g| !g.passed) {
        println!("gate failed: {}", gate.name);
    }
    let status = match outcome.status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Error => "ERROR",
    };
    println!("{status}: {}", outcome.output_dir.join("report.json").display());
    Ok(outcome.exit_code() as u8)
}
