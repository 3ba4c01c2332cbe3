//! Deterministic CSV/JSON writers and run manifests.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// `f64` with 17 significant digits, C locale.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Self::F(x) => fmt_f64(*x),
            Self::I(i) => i.to_string(),
            Self::S(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Self::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Self::I(x as i64)
    }
}

impl From<u8> for Cell {
    fn from(x: u8) -> Self {
        Self::I(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Self::S(s.to_string())
    }
}

/// Streaming CSV writer whose first line is `# config_hash=<hex>`.
pub struct CsvOut {
    inner: csv::Writer<BufWriter<File>>,
    width: usize,
}

impl CsvOut {
    pub fn create(path: &Path, hash: &str, header: &[&str]) -> Result<Self> {
        let mut file = BufWriter::new(File::create(path)?);
        writeln!(file, "# config_hash={hash}")?;
        let mut inner = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
        inner.write_record(header)?;
        Ok(Self { inner, width: header.len() })
    }

    pub fn row<I, C>(&mut self, cells: I) -> Result<()>
    where
        I: IntoIterator<Item = C>,
        C: Into<Cell>,
    {
        let rec: Vec<String> = cells.into_iter().map(|c| c.into().render()).collect();
        if rec.len() != self.width {
            return Err(HarnessError::Output(format!("row has {} cells, header {}", rec.len(), self.width)));
        }
        self.inner.write_record(&rec)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Output directory of one experiment; tracks files for the manifest.
pub struct RunDir {
    pub path: PathBuf,
    pub hash: String,
    outputs: Vec<String>,
    started: Instant,
}

impl RunDir {
    pub fn create(path: &Path, cfg: &ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(path)?;
        Ok(Self { path: path.to_path_buf(), hash: cfg.hash(), outputs: Vec::new(), started: Instant::now() })
    }

    pub fn csv(&mut self, name: &str, header: &[&str]) -> Result<CsvOut> {
        self.outputs.push(name.to_string());
        CsvOut::create(&self.path.join(name), &self.hash, header)
    }

    /// Pretty JSON with a `config_hash` field added to the top-level object.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut v = serde_json::to_value(value)?;
        if let Value::Object(m) = &mut v {
            m.insert("config_hash".into(), Value::String(self.hash.clone()));
        }
        self.outputs.push(name.to_string());
        write_json(&self.path.join(name), &v)
    }

    pub fn subdir(&self, name: &str) -> Result<PathBuf> {
        let p = self.path.join(name);
        fs::create_dir_all(&p)?;
        Ok(p)
    }

    pub fn record(&mut self, name: String) {
        self.outputs.push(name);
    }

    /// Writes manifest.json.
    pub fn finish(self, cfg: &ExperimentConfig) -> Result<()> {
        let manifest = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": cfg.command.name(),
            "config_hash": self.hash,
            "config": cfg,
            "wall_clock_seconds": self.started.elapsed().as_secs_f64(),
            "outputs": self.outputs,
        });
        write_json(&self.path.join("manifest.json"), &manifest)
    }
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Reads a CSV written by [`CsvOut`], skipping the hash line.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path)?;
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok((header, rows))
}
