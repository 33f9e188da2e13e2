//! Record emission: JSONL (primary) and CSV export.
//!
//! Floats are printed as `{:.16e}`, i.e. 17 significant digits, so every
//! value round-trips to the exact f64 that was computed. Output files are
//! opened in append mode; the tool never truncates existing data.

use std::fs::OpenOptions;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
}

/// One field value. Non-finite floats serialize as null (JSON) or an empty
/// cell (CSV); they only arise from degenerate inputs.
#[derive(Debug, Clone)]
pub enum Val {
    Null,
    Bool(bool),
    U64(u64),
    F64(f64),
    Str(String),
}

/// One output record: ordered (name, value) pairs. Within a run every record
/// sent to the same writer must share one field layout so CSV columns line up.
pub struct Rec(pub Vec<(&'static str, Val)>);

/// Common prefix carried by every record.
pub fn base_rec(kind: &'static str, seed: u64, stream_id: u64) -> Vec<(&'static str, Val)> {
    vec![
        ("type", Val::Str(kind.into())),
        ("schema_version", Val::U64(SCHEMA_VERSION)),
        ("seed", Val::U64(seed)),
        ("stream_id", Val::U64(stream_id)),
    ]
}

pub fn opt_f64(x: Option<f64>) -> Val {
    match x {
        Some(v) => Val::F64(v),
        None => Val::Null,
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_val(v: &Val) -> String {
    match v {
        Val::Null => "null".into(),
        Val::Bool(b) => b.to_string(),
        Val::U64(u) => u.to_string(),
        Val::F64(x) if x.is_finite() => fmt_f64(*x),
        Val::F64(_) => "null".into(),
        Val::Str(s) => serde_json::to_string(s).expect("strings always encode"),
    }
}

fn csv_val(v: &Val) -> String {
    match v {
        Val::Null => String::new(),
        Val::Bool(b) => b.to_string(),
        Val::U64(u) => u.to_string(),
        Val::F64(x) if x.is_finite() => fmt_f64(*x),
        Val::F64(_) => String::new(),
        Val::Str(s) => {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
    }
}

pub struct Writer {
    sink: Box<dyn Write>,
    format: Format,
    csv_columns: Option<Vec<&'static str>>,
    path: Option<PathBuf>,
}

impl Writer {
    pub fn create(out: Option<&Path>, format: Format) -> Result<Writer, (String, io::Error)> {
        let sink: Box<dyn Write> = match out {
            None => Box::new(BufWriter::new(io::stdout())),
            Some(p) => {
                let file = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(p)
                    .map_err(|e| (p.display().to_string(), e))?;
                Box::new(BufWriter::with_capacity(1 << 18, file))
            }
        };
        Ok(Writer { sink, format, csv_columns: None, path: out.map(Path::to_path_buf) })
    }

    pub fn format(&self) -> Format {
        self.format
    }

    /// Path shown in I/O error messages.
    pub fn path_label(&self) -> String {
        match &self.path {
            Some(p) => p.display().to_string(),
            None => "<stdout>".into(),
        }
    }

    pub fn emit(&mut self, rec: &Rec) -> io::Result<()> {
        match self.format {
            Format::Jsonl => {
                let mut line = String::with_capacity(160);
                line.push('{');
                for (i, (k, v)) in rec.0.iter().enumerate() {
                    if i > 0 {
                        line.push(',');
                    }
                    line.push('"');
                    line.push_str(k);
                    line.push_str("\":");
                    line.push_str(&json_val(v));
                }
                line.push('}');
                writeln!(self.sink, "{line}")
            }
            Format::Csv => {
                if self.csv_columns.is_none() {
                    let cols: Vec<&'static str> = rec.0.iter().map(|(k, _)| *k).collect();
                    writeln!(self.sink, "{}", cols.join(","))?;
                    self.csv_columns = Some(cols);
                }
                let row: Vec<String> = rec.0.iter().map(|(_, v)| csv_val(v)).collect();
                writeln!(self.sink, "{}", row.join(","))
            }
        }
    }

    /// Timestamped run header, one per invocation unless --no-header is set.
    /// In CSV mode it is a `#` comment line so the column row stays first
    /// among the parseable lines.
    pub fn emit_header(
        &mut self,
        command: &str,
        seed: u64,
        workers: usize,
        extras: &[(&'static str, Val)],
    ) -> io::Result<()> {
        let ts = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        match self.format {
            Format::Jsonl => {
                let mut fields = vec![
                    ("type", Val::Str("header".into())),
                    ("schema_version", Val::U64(SCHEMA_VERSION)),
                    ("timestamp_unix", Val::U64(ts)),
                    ("command", Val::Str(command.into())),
                    ("seed", Val::U64(seed)),
                    ("workers", Val::U64(workers as u64)),
                    ("stream_id", Val::U64(0)),
                ];
                fields.extend(extras.iter().cloned());
                self.emit(&Rec(fields))
            }
            Format::Csv => {
                let mut line = format!(
                    "# charpoly schema_version={SCHEMA_VERSION} timestamp_unix={ts} \
                     command={command} seed={seed} workers={workers}"
                );
                for (k, v) in extras {
                    line.push(' ');
                    line.push_str(k);
                    line.push('=');
                    line.push_str(&csv_val(v));
                }
                writeln!(self.sink, "{line}")
            }
        }
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.sink.flush()
    }
}
