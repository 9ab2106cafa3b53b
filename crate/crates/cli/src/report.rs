use std::fs::File;
use std::io::{self, Write};

use finescale_core::error::Category;
use serde::Serialize;
use serde_json::{Map, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_GUARD: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// Inputs of a run; `timing_ms` is the only field that varies between
/// identical invocations.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool_version: &'static str,
    pub command: &'static str,
    pub params: Map<String, Value>,
    pub seed: u64,
    pub timing_ms: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub category: &'static str,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub manifest: Manifest,
    pub results: Value,
    pub error: Option<ErrorInfo>,
}

/// A failed run, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub info: ErrorInfo,
}

impl Failure {
    pub fn usage(kind: &str, message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            info: ErrorInfo {
                kind: kind.into(),
                category: "usage",
                message: message.into(),
            },
        }
    }
}

impl From<finescale_core::Error> for Failure {
    fn from(e: finescale_core::Error) -> Self {
        let (code, category) = match e.category() {
            Category::Usage => (EXIT_USAGE, "usage"),
            Category::Guard => (EXIT_GUARD, "guard"),
        };
        Self {
            code,
            info: ErrorInfo {
                kind: e.kind().into(),
                category,
                message: e.to_string(),
            },
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::usage("Serialization", e.to_string())
    }
}

/// Rows for the formats that support CSV.
#[derive(Debug, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Successful output of a subcommand.
#[derive(Debug)]
pub struct Outcome {
    pub results: Value,
    pub csv: Option<CsvTable>,
    /// Set when the computation succeeded but a check failed.
    pub verification_failure: Option<String>,
}

impl Outcome {
    pub fn json<T: Serialize>(results: &T) -> Result<Self, Failure> {
        Ok(Self {
            results: serde_json::to_value(results)?,
            csv: None,
            verification_failure: None,
        })
    }

    pub fn with_csv(mut self, table: CsvTable) -> Self {
        self.csv = Some(table);
        self
    }

    pub fn check(mut self, pass: bool, message: &str) -> Self {
        if !pass {
            self.verification_failure = Some(message.to_string());
        }
        self
    }
}

pub fn open_out(path: &str) -> io::Result<Box<dyn Write>> {
    if path == "-" {
        Ok(Box::new(io::stdout().lock()))
    } else {
        Ok(Box::new(File::create(path)?))
    }
}

pub fn write_json(out: &mut dyn Write, report: &Report) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, report)?;
    writeln!(out)?;
    out.flush()
}

pub fn write_csv(out: &mut dyn Write, table: &CsvTable) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()
}
