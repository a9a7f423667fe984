//! `omex`: command-line front end for the omex-core library.

mod demo;
mod extract;
mod fingerprint;
mod matching;
mod report;
mod trev;

use std::io;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Parser, Subcommand};
use omex_core::ratio::{parse_rational, Rational};
use omex_core::{Error, Limits};

use report::Outcome;

#[derive(Parser)]
#[command(
    name = "omex",
    version,
    about = "On-line matchings, extractors and fingerprint protocols at desk scale"
)]
struct Cli {
    /// Print the report as key,value CSV instead of JSON.
    #[arg(long, global = true)]
    csv: bool,
    /// Add wall-clock timings to the report (makes output run-dependent).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Off-line matching graphs: generation, Hall checks, union bound.
    Offline {
        #[command(subcommand)]
        cmd: matching::OfflineCmd,
    },
    /// On-line matching: sessions, the strategy game, layered graphs.
    Online {
        #[command(subcommand)]
        cmd: matching::OnlineCmd,
    },
    /// Extractor views: verification, search, hazards, degree bounds.
    Ext {
        #[command(subcommand)]
        cmd: extract::ExtCmd,
    },
    /// Weak designs, Hadamard list decoding, Trevisan evaluation.
    Trev {
        #[command(subcommand)]
        cmd: trev::TrevCmd,
    },
    /// Fingerprint encoding and decoding.
    Fp {
        #[command(subcommand)]
        cmd: fingerprint::FpCmd,
    },
    /// End-to-end checks of the headline properties.
    Demo {
        #[command(subcommand)]
        cmd: demo::DemoCmd,
    },
}

pub fn rational(text: &str) -> std::result::Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

fn dispatch(command: Command, limits: &Limits) -> Result<Outcome> {
    match command {
        Command::Offline { cmd } => matching::offline(cmd, limits),
        Command::Online { cmd } => matching::online(cmd, limits),
        Command::Ext { cmd } => extract::run(cmd, limits),
        Command::Trev { cmd } => trev::run(cmd, limits),
        Command::Fp { cmd } => fingerprint::run(cmd, limits),
        Command::Demo { cmd } => demo::run(cmd, limits),
    }
}

/// A randomized search that ran out of attempts is a negative result, not a
/// usage error.
fn exhausted(err: &anyhow::Error) -> Option<u64> {
    match err.downcast_ref::<Error>() {
        Some(Error::AttemptsExhausted { attempts }) => Some(*attempts),
        _ => None,
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let limits = match Limits::from_env() {
        Ok(l) => l,
        Err(e) => {
            eprintln!("omex: {e}");
            return ExitCode::from(2);
        }
    };
    let start = Instant::now();
    let outcome = match dispatch(cli.command, &limits) {
        Ok(o) => o,
        Err(e) => match exhausted(&e) {
            Some(attempts) => Outcome {
                seed: None,
                parameters: serde_json::Value::Null,
                outcome: serde_json::json!({ "found": false, "attempts": attempts, "message": e.to_string() }),
                artifacts: Vec::new(),
                ok: false,
            },
            None => {
                eprintln!("omex: {e:#}");
                return ExitCode::from(2);
            }
        },
    };
    let elapsed = cli.timings.then(|| start.elapsed().as_secs_f64() * 1e3);
    let rendered = report::render(&argv[1..], &outcome, elapsed);
    if let Err(e) = report::write(&rendered, cli.csv, &mut io::stdout().lock()) {
        eprintln!("omex: {e:#}");
        return ExitCode::from(2);
    }
    ExitCode::from(if outcome.ok { 0 } else { 1 })
}
