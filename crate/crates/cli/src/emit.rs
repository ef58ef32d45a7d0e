//! Report emission: JSON envelopes and CSV writers.
//!
//! Every JSON report is one object with keys `config`, `result`,
//! `certified_error`, `timing`. The `timing` value is `null` unless the user
//! opted in with `--timing`, so report files are byte-identical across runs
//! at the same configuration (measured time always goes to stderr). CSV
//! output uses `.` decimals with 17 significant digits and a header row.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// The envelope around every report payload.
#[derive(Serialize)]
pub struct Report<C: Serialize, R: Serialize> {
    pub config: C,
    pub result: R,
    pub certified_error: Option<f64>,
    pub timing: Option<f64>,
}

/// Full configuration echo: command name, resolved thread count, arguments.
#[derive(Serialize)]
pub struct ConfigEcho<'a, A: Serialize> {
    pub command: &'a str,
    pub threads: usize,
    pub args: &'a A,
}

pub fn writer_for(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes the JSON report envelope (pretty, trailing newline).
pub fn write_json<C: Serialize, R: Serialize>(
    out: &Option<PathBuf>,
    report: &Report<C, R>,
) -> io::Result<()> {
    let mut w = writer_for(out)?;
    let text = serde_json::to_string_pretty(report).expect("report serialization");
    writeln!(w, "{text}")?;
    w.flush()
}

/// One CSV row of f64 cells at 17 significant digits.
pub fn write_f64_row<W: Write>(w: &mut W, cells: &[f64]) -> io::Result<()> {
    let mut first = true;
    for c in cells {
        if !first {
            write!(w, ",")?;
        }
        write!(w, "{c:.16e}")?;
        first = false;
    }
    writeln!(w)
}

/// Measured wall time: stderr always, report only on request.
pub fn timing_value(started: std::time::Instant, include: bool, command: &str) -> Option<f64> {
    let seconds = started.elapsed().as_secs_f64();
    eprintln!("{command}: {seconds:.3}s");
    include.then_some(seconds)
}
