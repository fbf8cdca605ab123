mod args;
mod commands;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use imcc::harness::parse_key_values;
use imcc::{Error, ErrorClass};

use crate::args::{Cli, Command};

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Usage => 1,
        ErrorClass::Data => 2,
        ErrorClass::Numerical => 3,
    }
}

/// Appends `--key value` for every config entry so clap's last-occurrence rule
/// lets the file win over earlier flags. `key = true` becomes a bare switch.
fn with_config(mut argv: Vec<OsString>, text: &str) -> imcc::Result<Vec<OsString>> {
    for (key, value) in parse_key_values(text)? {
        if key == "config" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value.as_str() {
            "true" => argv.push(flag.into()),
            "false" => {}
            _ => {
                argv.push(flag.into());
                argv.push(value.into());
            }
        }
    }
    Ok(argv)
}

/// Value of the last `--config` on the raw command line.
fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut found = None;
    let mut args = argv.iter().skip(1);
    while let Some(arg) = args.next() {
        let arg = arg.to_string_lossy();
        if arg == "--" {
            break;
        } else if arg == "--config" {
            found = args.next().map(PathBuf::from);
        } else if let Some(value) = arg.strip_prefix("--config=") {
            found = Some(PathBuf::from(value));
        }
    }
    found
}

/// The parsed command line, or the exit status to stop with.
fn parse() -> Result<Cli, u8> {
    let mut argv: Vec<OsString> = std::env::args_os().collect();
    if let Some(path) = config_path(&argv) {
        let extended = fs::read_to_string(&path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))
            .and_then(|text| with_config(argv, &text));
        argv = match extended {
            Ok(argv) => argv,
            Err(e) => {
                eprintln!("error: {e}");
                return Err(1);
            }
        };
    }
    Cli::try_parse_from(argv).map_err(|e| {
        let _ = e.print();
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
            _ => 1,
        }
    })
}

fn main() -> ExitCode {
    let cli = match parse() {
        Ok(cli) => cli,
        Err(code) => return ExitCode::from(code),
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let seed = cli.seed;
    let outcome = match cli.command {
        Command::Train(a) => commands::train(a, seed),
        Command::Predict(a) => commands::predict(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Benchmark(a) => commands::benchmark(a, seed),
        Command::Stats(a) => commands::stats(a),
        Command::GenSynthetic(a) => commands::gen_synthetic(a, seed),
        Command::Describe(a) => commands::describe(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.class()))
        }
    }
}
