//! Deterministic result tables.
//!
//! Every experiment emits a metadata header (JSON on a `#` comment line for
//! CSV, a `"type":"meta"` record for JSON lines), then one row per sweep
//! cell in configuration-grid order. Floats are written with Rust's
//! shortest-round-trip formatting, so identical runs produce byte-identical
//! files. Wall-clock timings are only included when explicitly requested,
//! since they would break that guarantee.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(format!("unknown format `{other}` (use csv or jsonl)")),
        }
    }
}

/// An ordered key-value record; doubles as parameter echo and output row.
pub type Record = Vec<(String, String)>;

pub fn field(key: &str, value: impl std::fmt::Display) -> (String, String) {
    (key.to_string(), value.to_string())
}

/// FNV-1a over the canonical `key=value` lines of the resolved config.
pub fn config_hash(resolved: &Record) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for (k, v) in resolved {
        for byte in k.bytes().chain(*b"=").chain(v.bytes()).chain(*b"\n") {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    hash
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn json_object(record: &Record) -> String {
    let mut s = String::from("{");
    for (i, (k, v)) in record.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        // Values that parse as plain numbers are emitted unquoted.
        let is_number = v.parse::<f64>().is_ok() && !v.is_empty();
        let is_bool = v == "true" || v == "false";
        if is_number || is_bool {
            s.push_str(&format!("\"{}\":{}", json_escape(k), v));
        } else {
            s.push_str(&format!("\"{}\":\"{}\"", json_escape(k), json_escape(v)));
        }
    }
    s.push('}');
    s
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Streaming table writer.
pub struct TableWriter {
    sink: Box<dyn Write>,
    format: Format,
    header_written: bool,
    columns: Vec<String>,
}

impl TableWriter {
    pub fn to_path(path: Option<&Path>, format: Format) -> io::Result<Self> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Self {
            sink,
            format,
            header_written: false,
            columns: Vec::new(),
        })
    }

    /// Metadata header; call once before any rows.
    pub fn meta(&mut self, meta: &Record) -> io::Result<()> {
        match self.format {
            Format::Csv => writeln!(self.sink, "# {}", json_object(meta)),
            Format::Jsonl => {
                let mut r: Record = vec![field("type", "meta")];
                r.extend(meta.iter().cloned());
                writeln!(self.sink, "{}", json_object(&r))
            }
        }
    }

    /// One data row. The first row fixes the CSV column order.
    pub fn row(&mut self, row: &Record) -> io::Result<()> {
        match self.format {
            Format::Csv => {
                if !self.header_written {
                    self.columns = row.iter().map(|(k, _)| k.clone()).collect();
                    let header: Vec<String> = self.columns.iter().map(|c| csv_escape(c)).collect();
                    writeln!(self.sink, "{}", header.join(","))?;
                    self.header_written = true;
                }
                let cells: Vec<String> = self
                    .columns
                    .iter()
                    .map(|c| {
                        row.iter()
                            .find(|(k, _)| k == c)
                            .map(|(_, v)| csv_escape(v))
                            .unwrap_or_default()
                    })
                    .collect();
                writeln!(self.sink, "{}", cells.join(","))
            }
            Format::Jsonl => {
                let mut r: Record = vec![field("type", "row")];
                r.extend(row.iter().cloned());
                writeln!(self.sink, "{}", json_object(&r))
            }
        }
    }

    /// Trailing summary (the JSON footer of `weights`, fit results, ...).
    pub fn footer(&mut self, tag: &str, record: &Record) -> io::Result<()> {
        match self.format {
            Format::Csv => {
                let mut r: Record = vec![field("footer", tag)];
                r.extend(record.iter().cloned());
                writeln!(self.sink, "# {}", json_object(&r))
            }
            Format::Jsonl => {
                let mut r: Record = vec![field("type", tag)];
                r.extend(record.iter().cloned());
                writeln!(self.sink, "{}", json_object(&r))
            }
        }
    }

    /// A raw JSON record line (used for per-iteration traces).
    pub fn trace(&mut self, record: &Record) -> io::Result<()> {
        match self.format {
            Format::Csv => writeln!(self.sink, "# {}", json_object(record)),
            Format::Jsonl => writeln!(self.sink, "{}", json_object(record)),
        }
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.sink.flush()
    }
}
