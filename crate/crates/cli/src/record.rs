//! Output records and their CSV, JSON and TSV forms.
//!
//! CSV layout, schema version 1:
//!
//! ```text
//! # schema_version=1
//! # experiment=<id>
//! # config_hash=<hex sha256 of the config line>
//! # seed=<master seed>
//! # config=<config as one-line JSON>
//! # result=<name>,<value>,<stderr or empty>
//! <column header>
//! <rows>
//! ```
//!
//! The timestamp is kept out of the CSV so that repeated runs produce
//! identical bytes; the JSON form carries it.

use std::io::{BufRead, Write};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Format};

pub const SCHEMA_VERSION: u32 = 1;

/// A table cell. Non-finite numbers are stored as text so that JSON can carry them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn num(x: f64) -> Self {
        if x.is_finite() {
            Cell::Num(x)
        } else {
            Cell::Text(x.to_string())
        }
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn flag(b: bool) -> Self {
        Cell::Num(if b { 1.0 } else { 0.0 })
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Text(s) => s.parse().ok(),
        }
    }

    fn parse(s: &str) -> Self {
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Cell::Num(x),
            _ => Cell::Text(s.to_string()),
        }
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Num(x) => write!(f, "{x}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// Named scalar with an optional standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarResult {
    pub name: String,
    pub value: Cell,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub experiment: String,
    /// Seconds since the Unix epoch; absent in records read back from CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub results: Vec<ScalarResult>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultRecord {
    pub fn new(experiment: &str, config: &ExperimentConfig) -> Self {
        ResultRecord {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            timestamp: None,
            config_hash: config.hash(),
            seed: config.seed,
            config: config.resolved(),
            results: Vec::new(),
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn stamped(mut self) -> Self {
        let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        self.timestamp = Some(now);
        self
    }

    pub fn push_result(&mut self, name: impl Into<String>, value: f64, stderr: Option<f64>) {
        self.results.push(ScalarResult { name: name.into(), value: Cell::num(value), stderr });
    }

    pub fn result(&self, name: &str) -> Option<f64> {
        self.results.iter().find(|r| r.name == name).and_then(|r| r.value.as_f64())
    }

    /// Column `name` as numbers; text cells become NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64().unwrap_or(f64::NAN)).collect())
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> anyhow::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
            Format::Tsv => self.write_tsv(out),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> anyhow::Result<()> {
        writeln!(out, "# schema_version={}", self.schema_version)?;
        writeln!(out, "# experiment={}", self.experiment)?;
        writeln!(out, "# config_hash={}", self.config_hash)?;
        writeln!(out, "# seed={}", self.seed)?;
        writeln!(out, "# config={}", serde_json::to_string(&self.config)?)?;
        for r in &self.results {
            let se = r.stderr.map(|s| s.to_string()).unwrap_or_default();
            writeln!(out, "# result={},{},{}", r.name, r.value, se)?;
        }
        let mut w = csv::WriterBuilder::new().flexible(false).from_writer(out);
        if !self.columns.is_empty() {
            w.write_record(&self.columns)?;
        }
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> anyhow::Result<Self> {
        let mut meta = Vec::new();
        let mut body = String::new();
        for line in input.lines() {
            let line = line?;
            match line.strip_prefix("# ") {
                Some(m) if body.is_empty() => meta.push(m.to_string()),
                _ => {
                    body.push_str(&line);
                    body.push('\n');
                }
            }
        }
        let mut schema_version = None;
        let mut experiment = None;
        let mut config_hash = None;
        let mut seed = None;
        let mut config = None;
        let mut results = Vec::new();
        for m in meta {
            let (key, value) = m.split_once('=').with_context(|| format!("bad header line {m}"))?;
            match key {
                "schema_version" => schema_version = Some(value.parse()?),
                "experiment" => experiment = Some(value.to_string()),
                "config_hash" => config_hash = Some(value.to_string()),
                "seed" => seed = Some(value.parse()?),
                "config" => config = Some(serde_json::from_str(value)?),
                "result" => {
                    let mut parts = value.rsplitn(3, ',');
                    let se = parts.next().context("result stderr")?;
                    let v = parts.next().context("result value")?;
                    let name = parts.next().context("result name")?;
                    results.push(ScalarResult {
                        name: name.to_string(),
                        value: Cell::parse(v),
                        stderr: if se.is_empty() { None } else { Some(se.parse()?) },
                    });
                }
                other => bail!("unknown header key {other}"),
            }
        }
        let schema_version: u32 = schema_version.context("missing schema_version")?;
        if schema_version != SCHEMA_VERSION {
            bail!("unsupported schema version {schema_version}");
        }
        let mut columns = Vec::new();
        let mut rows = Vec::new();
        if !body.is_empty() {
            let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
            columns = r.headers()?.iter().map(str::to_string).collect();
            for rec in r.records() {
                rows.push(rec?.iter().map(Cell::parse).collect());
            }
        }
        Ok(ResultRecord {
            schema_version,
            experiment: experiment.context("missing experiment")?,
            timestamp: None,
            config_hash: config_hash.context("missing config_hash")?,
            seed: seed.context("missing seed")?,
            config: config.context("missing config")?,
            results,
            columns,
            rows,
        })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> anyhow::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn read_json<R: std::io::Read>(input: R) -> anyhow::Result<Self> {
        Ok(serde_json::from_reader(input)?)
    }

    /// Gnuplot-friendly data: comment header, then tab-separated columns.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> anyhow::Result<()> {
        writeln!(out, "# {} config_hash={} seed={}", self.experiment, self.config_hash, self.seed)?;
        for r in &self.results {
            writeln!(out, "# {} = {}", r.name, r.value)?;
        }
        writeln!(out, "# {}", self.columns.join("\t"))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|c| c.to_string().replace(char::is_whitespace, "_")).collect();
            writeln!(out, "{}", line.join("\t"))?;
        }
        Ok(())
    }
}
