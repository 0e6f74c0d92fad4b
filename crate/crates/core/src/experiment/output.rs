//! Result files. Every file starts with provenance: `#` comment lines in CSV,
//! `config_hash` and `version` keys in JSON.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{SweepRow, ERROR_SWEEP_HEADER};
use crate::error::{Error, Result};
use crate::io::write_atomic;

pub const RECONSTRUCTION_HEADER: [&str; 5] = ["row", "col", "x_true", "x_hat", "detected"];
pub const PIXEL_SWEEP_HEADER: [&str; 4] = ["size", "model", "md", "fa"];

/// Provenance written ahead of CSV content.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub version: String,
    pub extra: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(config_hash: impl Into<String>) -> Self {
        Self { config_hash: config_hash.into(), version: super::config::VERSION.to_string(), extra: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.extra.push((key.to_string(), value.into()));
        self
    }

    fn write(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "# config_hash={}", self.config_hash)?;
        writeln!(w, "# version={}", self.version)?;
        for (k, v) in &self.extra {
            writeln!(w, "# {k}={v}")?;
        }
        Ok(())
    }
}

fn write_csv<R: Serialize>(path: &Path, provenance: &Provenance, header: &[&str], rows: &[R]) -> Result<()> {
    write_atomic(path, |f| {
        let mut buf = std::io::BufWriter::new(f);
        provenance.write(&mut buf)?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(buf);
        w.write_record(header)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    })
}

fn read_csv<R: for<'de> Deserialize<'de>>(path: &Path, header: &[&str]) -> Result<Vec<R>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(Error::Config(format!("{}: expected header {:?}, found {:?}", path.display(), header, found)));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |f| {
        let mut buf = std::io::BufWriter::new(f);
        serde_json::to_writer_pretty(&mut buf, value)?;
        buf.write_all(b"\n")?;
        buf.flush()?;
        Ok(())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionRow {
    pub row: usize,
    pub col: usize,
    pub x_true: f64,
    pub x_hat: f64,
    /// 1 when the normalized estimate reaches the threshold.
    pub detected: u8,
}

pub fn write_reconstruction(path: &Path, provenance: &Provenance, rows: &[ReconstructionRow]) -> Result<()> {
    write_csv(path, provenance, &RECONSTRUCTION_HEADER, rows)
}

pub fn read_reconstruction(path: &Path) -> Result<Vec<ReconstructionRow>> {
    read_csv(path, &RECONSTRUCTION_HEADER)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PixelSweepRow {
    pub size: f64,
    pub model: String,
    pub md: Option<f64>,
    pub fa: Option<f64>,
}

pub fn write_pixel_sweep(path: &Path, provenance: &Provenance, rows: &[PixelSweepRow]) -> Result<()> {
    write_csv(path, provenance, &PIXEL_SWEEP_HEADER, rows)
}

pub fn read_pixel_sweep(path: &Path) -> Result<Vec<PixelSweepRow>> {
    read_csv(path, &PIXEL_SWEEP_HEADER)
}

pub fn write_error_sweep(path: &Path, provenance: &Provenance, rows: &[SweepRow]) -> Result<()> {
    write_csv(path, provenance, &ERROR_SWEEP_HEADER, rows)
}

pub fn read_error_sweep(path: &Path) -> Result<Vec<SweepRow>> {
    read_csv(path, &ERROR_SWEEP_HEADER)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_sweep_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pixel_sweep.csv");
        let rows = vec![
            PixelSweepRow { size: 0.1, model: "integral".into(), md: Some(0.25), fa: Some(1.0 / 3.0) },
            PixelSweepRow { size: 0.001, model: "conventional".into(), md: None, fa: Some(0.0) },
        ];
        write_pixel_sweep(&path, &Provenance::new("abc"), &rows).unwrap();
        assert_eq!(read_pixel_sweep(&path).unwrap(), rows);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# config_hash=abc\n# version="));
        assert!(text.contains("\nsize,model,md,fa\n"));
    }

    #[test]
    fn header_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "size,modle,md,fa\n0.1,integral,0,0\n").unwrap();
        assert!(matches!(read_pixel_sweep(&path), Err(Error::Config(_))));
    }
}
