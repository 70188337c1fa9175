//! Report envelope and atomic file output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use spirallab::report::{Witness, MAX_WITNESSES};

use crate::CliError;

pub const SCHEMA: &str = "spirallab/1";

/// What a subcommand hands back to the driver.
#[derive(Debug, Default)]
pub struct Outcome {
    pub inputs: Value,
    pub pass: bool,
    pub inconclusive: bool,
    pub measured: f64,
    pub predicted: f64,
    /// Extra top-level summary keys.
    pub summary: Map<String, Value>,
    pub witnesses: Vec<Witness>,
    pub result: Value,
    pub csv: Vec<(PathBuf, String)>,
}

impl Outcome {
    pub fn add_witnesses(&mut self, w: &[Witness]) {
        let room = MAX_WITNESSES.saturating_sub(self.witnesses.len());
        self.witnesses.extend(w.iter().take(room).cloned());
    }
}

#[derive(Serialize)]
struct Timing {
    elapsed_ms: f64,
    threads: usize,
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: &'static str,
    version: &'static str,
    subcommand: &'a str,
    inputs: &'a Value,
    pass: bool,
    inconclusive: bool,
    measured: f64,
    predicted: f64,
    #[serde(flatten)]
    summary: &'a Map<String, Value>,
    witnesses: &'a [Witness],
    result: &'a Value,
    timing: Timing,
}

pub fn render(subcommand: &str, o: &Outcome, elapsed_ms: f64) -> Result<String, CliError> {
    let env = Envelope {
        schema: SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        inputs: &o.inputs,
        pass: o.pass,
        inconclusive: o.inconclusive,
        measured: o.measured,
        predicted: o.predicted,
        summary: &o.summary,
        witnesses: &o.witnesses,
        result: &o.result,
        timing: Timing { elapsed_ms, threads: rayon::current_num_threads() },
    };
    let mut s = serde_json::to_string_pretty(&env)?;
    s.push('\n');
    Ok(s)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.to_owned(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// CSV text from a header and rows of numbers.
pub fn csv<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = f64>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{v:?}");
        }
        out.push('\n');
    }
    out
}
