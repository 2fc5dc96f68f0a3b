use std::io::Write;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

/// Whether the checks a command performs held.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    CheckFailed,
}

impl Status {
    pub fn from_pass(passed: bool) -> Self {
        if passed {
            Status::Ok
        } else {
            Status::CheckFailed
        }
    }
}

/// Rows of numbers or labels with named columns.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v:e}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => write!(f, "{s}"),
        }
    }
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    /// Columns of equal length, all numeric.
    pub fn from_columns(columns: &[(&str, &[f64])]) -> Self {
        let mut t = Table::new(columns.iter().map(|(n, _)| *n));
        let len = columns.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
        for i in 0..len {
            t.rows.push(columns.iter().map(|(_, c)| c.get(i).map_or(Cell::Text(String::new()), |v| Cell::Num(*v))).collect());
        }
        t
    }

    fn render(&self, command: &str) -> String {
        let mut s = format!("# soblab {command}\n# columns: {}\n", self.columns.join(","));
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// What a command hands back for printing.
pub struct Outcome {
    pub report: Value,
    pub table: Option<Table>,
    pub status: Status,
}

impl Outcome {
    pub fn new<R: Serialize>(report: &R, status: Status) -> CliResult<Self> {
        Ok(Outcome { report: to_value(report)?, table: None, status })
    }

    pub fn ok<R: Serialize>(report: &R) -> CliResult<Self> {
        Outcome::new(report, Status::Ok)
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }
}

pub fn to_value<R: Serialize>(r: &R) -> CliResult<Value> {
    serde_json::to_value(r).map_err(|e| CliError::parse("report", e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Destination and format shared by every command.
pub struct Sink {
    pub format: Format,
    pub path: Option<PathBuf>,
    pub started: Instant,
    pub threads: usize,
}

impl Sink {
    /// Writes the report. JSON carries the run configuration next to the
    /// report; wall-clock data goes to `metadata` only, so report bodies of
    /// equal runs are byte-identical.
    pub fn emit(&self, command: &str, config: &Value, outcome: &Outcome) -> CliResult<()> {
        let text = match self.format {
            Format::Json => {
                let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
                let doc = json!({
                    "command": command,
                    "config": config,
                    "report": outcome.report,
                    "status": if outcome.status == Status::Ok { "ok" } else { "check_failed" },
                    "metadata": {
                        "version": env!("CARGO_PKG_VERSION"),
                        "unix_time": stamp,
                        "elapsed_ms": self.started.elapsed().as_millis() as u64,
                        "threads": self.threads,
                    },
                });
                let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::parse("report", e))?;
                s.push('\n');
                s
            }
            Format::Csv => match &outcome.table {
                Some(t) => t.render(command),
                None => return Err(CliError::usage(format!("`{command}` has no tabular output; use --json"))),
            },
        };
        write_text(self.path.as_ref(), &text)
    }
}

pub fn write_text(path: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}
