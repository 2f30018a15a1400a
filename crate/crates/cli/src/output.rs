//! Result export: CSV tables with a `#`-prefixed config/summary preamble,
//! or a JSON object `{ "config": ..., "results": ... }`. Floating values in
//! CSV are printed with 17 significant digits so they round-trip to the
//! exact double.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use crate::args::Format;

/// 17 significant digits: exact round trip for f64.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

pub enum Sink {
    Stdout(io::Stdout),
    File(BufWriter<File>),
}

impl Sink {
    pub fn open(path: &str) -> io::Result<Sink> {
        if path == "-" {
            Ok(Sink::Stdout(io::stdout()))
        } else {
            Ok(Sink::File(BufWriter::new(File::create(path)?)))
        }
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            Sink::Stdout(s) => s.write(buf),
            Sink::File(f) => f.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Sink::Stdout(s) => s.flush(),
            Sink::File(f) => f.flush(),
        }
    }
}

/// One CSV cell. Strings are quoted RFC-4180 style when they contain a
/// comma, quote, or newline.
pub enum Cell {
    F(f64),
    I(u64),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_f(*x),
            Cell::I(n) => n.to_string(),
            Cell::S(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
        }
    }
}

pub struct CsvTable {
    pub preamble: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn write(&self, out: &mut dyn Write) -> io::Result<()> {
        for (k, v) in &self.preamble {
            writeln!(out, "# {k} {v}")?;
        }
        writeln!(out, "{}", self.header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        out.flush()
    }
}

/// Emit either the CSV table or the JSON document to the sink.
pub fn emit(
    format: Format,
    out_path: &str,
    table: &CsvTable,
    config: serde_json::Value,
    results: serde_json::Value,
) -> io::Result<()> {
    let mut sink = Sink::open(out_path)?;
    match format {
        Format::Csv => table.write(&mut sink),
        Format::Json => {
            let doc = serde_json::json!({ "config": config, "results": results });
            writeln!(sink, "{}", serde_json::to_string_pretty(&doc)?)?;
            sink.flush()
        }
    }
}
