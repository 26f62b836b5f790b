//! Front end of `loewner-core`: run descriptions, CSV output and the
//! acceptance suite behind `loewner selftest`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;
use loewner_core::Error;

pub use args::{Cli, Command};
pub use commands::{execute, Output};
pub use config::{load_config, save_config, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numeric() {
        EXIT_NUMERIC
    } else {
        EXIT_INVALID
    }
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
        }
    };
    if let Command::Selftest = cli.command {
        return selftest();
    }
    let out_path = match &cli.command {
        Command::Flow(a) => a.out.out.clone(),
        Command::Trace(a) => a.out.out.clone(),
        Command::Welding(a) => a.out.out.clone(),
        Command::Convolve(a) => a.out.out.clone(),
        Command::Density(a) => a.out.out.clone(),
        Command::Family(a) => a.out.out.clone(),
        Command::Sle(a) => a.out.out.clone(),
        Command::Burgers(a) => a.out.out.clone(),
        Command::Selftest => None,
    };
    let out = match execute(&cli.command) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    for note in &out.notes {
        eprintln!("# {note}");
    }
    let written = match &out_path {
        Some(p) => std::fs::write(p, &out.csv).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout().write_all(&out.csv).map_err(|e| e.to_string()),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_INVALID
        }
    }
}

fn selftest() -> i32 {
    let mut ok = true;
    for c in acceptance::CRITERIA {
        let outcome = acceptance::run_criterion(c.0);
        println!("{}", outcome.line());
        ok &= outcome.passed();
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_NUMERIC
    }
}
