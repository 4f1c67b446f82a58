mod args;
mod commands;
mod record;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::{CliError, Outcome};

const EXIT_OK: u8 = 0;
const EXIT_FAILURE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_USAGE: u8 = 64;

fn exit_code(e: &CliError) -> u8 {
    use hypfill_core::Error as E;
    match e {
        CliError::Core(E::NumericGuard(_)) => EXIT_NUMERIC,
        CliError::Core(E::Internal(_)) | CliError::Io(_) => EXIT_FAILURE,
        CliError::Core(_) | CliError::Replay(_) => EXIT_VALIDATION,
        CliError::Usage(_) => EXIT_USAGE,
    }
}

fn write_outputs(dir: &Path, outcome: &Outcome) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for (name, bytes) in &outcome.outputs {
        let path = dir.join(name);
        fs::write(&path, bytes)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn run(argv: Vec<String>) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure {n} threads: {e}")))?;
    }
    if let Command::Replay(r) = &cli.command {
        let report = record::replay(&r.record)?;
        if r.write {
            write_outputs(&cli.out_dir, &report.outcome)?;
        }
        eprintln!("replay: {} output(s) byte-identical", report.outcome.outputs.len());
        return Ok(());
    }
    let started = Instant::now();
    let outcome = commands::execute(&cli.command)?;
    let elapsed = started.elapsed().as_secs_f64();
    write_outputs(&cli.out_dir, &outcome)?;
    let rec = record::ExperimentRecord::new(&argv[1..], &outcome, elapsed, cli.threads)?;
    let path = cli.out_dir.join(format!("{}.record.json", outcome.stem));
    fs::write(&path, hypfill_core::io::to_json_string(&rec)?)?;
    println!("{}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
