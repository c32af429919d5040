//! Serialization of command results as JSON lines or CSV.
//!
//! JSON output is one object per line, each tagged `"schema": 1`. CSV output
//! starts with a `#` comment naming the quantity tabulated, then a header row.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::{json, Map, Value};

use pmeans::discrete::RandomDiscreteSample;
use pmeans::verify::CheckReport;

pub const SCHEMA: u32 = 1;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Rows sharing one set of named columns.
pub struct Table {
    title: String,
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(title: &str, columns: &[&str]) -> Self {
        Self { title: title.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, values: Vec<Value>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values);
    }
}

pub struct Sink {
    format: Format,
    out: Box<dyn Write>,
    // streaming outputs write their CSV preamble once
    started: bool,
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Sink {
    pub fn open(path: Option<&Path>, format: Format) -> Result<Self> {
        let w: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Self { format, out: w, started: false })
    }

    fn json_line(&mut self, mut obj: Map<String, Value>) -> Result<()> {
        let mut line = Map::new();
        line.insert("schema".into(), json!(SCHEMA));
        line.append(&mut obj);
        serde_json::to_writer(&mut self.out, &Value::Object(line))?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    fn csv_preamble(&mut self, title: &str, columns: &[&str]) -> Result<()> {
        writeln!(self.out, "# {title}")?;
        self.csv_row(columns.iter().map(|c| c.to_string()))
    }

    fn csv_row<I: IntoIterator<Item = String>>(&mut self, fields: I) -> Result<()> {
        // the csv writer handles quoting; the comment line above bypasses it
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(fields.into_iter().collect::<Vec<_>>())?;
        self.out.write_all(&w.into_inner().map_err(|e| e.into_error())?)?;
        Ok(())
    }

    pub fn table(&mut self, t: &Table) -> Result<()> {
        match self.format {
            Format::Json => {
                for row in &t.rows {
                    let obj = t.columns.iter().cloned().zip(row.iter().cloned()).collect();
                    self.json_line(obj)?;
                }
            }
            Format::Csv => {
                let cols: Vec<&str> = t.columns.iter().map(String::as_str).collect();
                self.csv_preamble(&t.title, &cols)?;
                for row in &t.rows {
                    self.csv_row(row.iter().map(cell))?;
                }
            }
        }
        Ok(())
    }

    /// A single value attached to a composition of n.
    pub fn value(&mut self, title: &str, name: &str, composition: &impl ToString, v: f64) -> Result<()> {
        let mut t = Table::new(title, &["quantity", "composition", "value"]);
        t.row(vec![json!(name), json!(composition.to_string()), json!(v)]);
        self.table(&t)
    }

    pub fn sample(&mut self, index: usize, s: &RandomDiscreteSample) -> Result<()> {
        match self.format {
            Format::Json => {
                let mut obj = Map::new();
                obj.insert("sample".into(), json!(index));
                if let Value::Object(mut rest) = serde_json::to_value(s)? {
                    obj.append(&mut rest);
                }
                self.json_line(obj)
            }
            Format::Csv => {
                if !self.started {
                    self.csv_preamble(
                        "atom weights of random discrete distributions; atom 'defect' holds the unassigned mass",
                        &["sample", "atom", "weight", "order"],
                    )?;
                    self.started = true;
                }
                let order = s.order().to_string();
                for (j, w) in s.weights().iter().enumerate() {
                    self.csv_row([index.to_string(), j.to_string(), w.to_string(), order.clone()])?;
                }
                self.csv_row([index.to_string(), "defect".into(), s.defect().to_string(), order])
            }
        }
    }

    pub fn report(&mut self, r: &CheckReport) -> Result<()> {
        match self.format {
            Format::Json => {
                self.out.write_all(r.to_json().as_bytes())?;
                self.out.write_all(b"\n")?;
                Ok(())
            }
            Format::Csv => {
                if !self.started {
                    self.csv_preamble(
                        "identity checks: statistic against threshold",
                        &["check_name", "statistic", "threshold", "n_samples", "seed", "passed", "sentinel", "params"],
                    )?;
                    self.started = true;
                }
                let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                self.csv_row([
                    r.check_name.clone(),
                    r.statistic.to_string(),
                    r.threshold.to_string(),
                    r.n_samples.to_string(),
                    r.seed.to_string(),
                    r.passed.to_string(),
                    r.sentinel.to_string(),
                    params.join(";"),
                ])
            }
        }
    }

    pub fn finish(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}
