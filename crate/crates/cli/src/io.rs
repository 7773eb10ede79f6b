//! File plumbing shared by the subcommands: error classes, atomic writes
//! and CSV helpers.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

/// Failure of a subcommand, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// The model rejected the request.
    Domain(vswrist::Error),
    /// Reading, parsing or writing a file failed. The optional hint
    /// describes the expected input schema.
    Io { message: String, hint: Option<&'static str> },
}

impl CliError {
    pub fn io(message: impl Into<String>) -> Self {
        CliError::Io { message: message.into(), hint: None }
    }

    pub fn parse(message: impl Into<String>, hint: &'static str) -> Self {
        CliError::Io { message: message.into(), hint: Some(hint) }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Io { .. } => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io { message, hint: None } => write!(f, "{message}"),
            CliError::Io { message, hint: Some(h) } => write!(f, "{message}\n\nexpected input:\n{h}"),
        }
    }
}

impl From<vswrist::Error> for CliError {
    fn from(e: vswrist::Error) -> Self {
        CliError::Domain(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path, hint: &'static str) -> CliResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display()), hint))
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// followed by a rename, or to stdout when no path is given.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    let Some(path) = path else {
        let mut out = io::stdout().lock();
        return out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::io(format!("stdout: {e}")));
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let fail = |e: io::Error| CliError::io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

/// CSV table built in memory; numbers are written in shortest round-trip
/// form so that parsing them back gives the same bits.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn numbers(&mut self, values: &[f64]) {
        self.row(values.iter().map(|v| v.to_string()));
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

/// Reads a CSV whose header must equal `header`, with every field numeric.
pub fn read_numeric_csv(path: &Path, header: &[&str], hint: &'static str) -> CliResult<Vec<Vec<f64>>> {
    let text = read_text(path)?;
    let bad = |m: String| CliError::parse(format!("{}: {m}", path.display()), hint);
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let found = rd.headers().map_err(|e| bad(e.to_string()))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(bad(format!("header is `{}`", found.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("row {}: {e}", i + 1)))?;
        rows.push(row);
    }
    Ok(rows)
}
