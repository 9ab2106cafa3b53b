mod args;
mod commands;
mod report;
mod table;

use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::Value;

use args::{Cli, Format};
use commands::Runner;
use report::{
    open_out, write_csv, write_json, ErrorInfo, Failure, Manifest, Report, EXIT_OK, EXIT_USAGE,
    EXIT_VERIFY,
};

fn main() -> ExitCode {
    ExitCode::from(run() as u8)
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.common.threads)
        .build_global()
    {
        eprintln!("finescale: thread pool: {e}");
        return EXIT_USAGE;
    }

    let started = Instant::now();
    let mut runner = Runner::new(&cli.common);
    let outcome = runner.run(&cli.command).and_then(|o| {
        if cli.common.format == Format::Csv && o.csv.is_none() {
            Err(Failure::usage(
                "CsvUnsupported",
                format!("{} has no tabular output", cli.command.name()),
            ))
        } else {
            Ok(o)
        }
    });
    let mut params = runner.params;
    params.insert(
        "format".into(),
        Value::from(if cli.common.format == Format::Csv {
            "csv"
        } else {
            "json"
        }),
    );
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name(),
        params,
        seed: cli.common.seed,
        timing_ms: started.elapsed().as_millis() as u64,
    };

    let mut out = match open_out(&cli.common.out) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("finescale: {}: {e}", cli.common.out);
            return EXIT_USAGE;
        }
    };
    let (written, code) = match outcome {
        Ok(outcome) => {
            let verify = outcome.verification_failure.clone();
            let code = if verify.is_some() {
                EXIT_VERIFY
            } else {
                EXIT_OK
            };
            if let Some(msg) = &verify {
                eprintln!("finescale: verification failed: {msg}");
            }
            let written = match (cli.common.format, outcome.csv) {
                (Format::Csv, Some(table)) => write_csv(&mut out, &table),
                _ => {
                    let error = verify.map(|message| ErrorInfo {
                        kind: "VerificationFailed".into(),
                        category: "verification",
                        message,
                    });
                    write_json(
                        &mut out,
                        &Report {
                            manifest,
                            results: outcome.results,
                            error,
                        },
                    )
                }
            };
            (written, code)
        }
        Err(failure) => {
            eprintln!("finescale: {}: {}", failure.info.kind, failure.info.message);
            let report = Report {
                manifest,
                results: Value::Null,
                error: Some(failure.info),
            };
            (write_json(&mut out, &report), failure.code)
        }
    };
    if let Err(e) = written {
        eprintln!("finescale: write failed: {e}");
        return EXIT_USAGE;
    }
    code
}
