//! Binary complex-matrix files and the measurement-matrix cache.
//!
//! A file is a sequence of records. Each record is laid out little-endian as
//!
//! ```text
//! offset  size  field
//! 0       8     magic  b"PXISACMT"
//! 8       4     format version (u32, currently 1)
//! 12      1     element type: 1 = complex64 (f32 re, f32 im), 2 = complex128
//! 13      3     reserved, zero
//! 16      8     rows (u64)
//! 24      8     cols (u64)
//! 32      32    content hash (SHA-256)
//! 64      4     label length L (u32)
//! 68      L     label, UTF-8 (names the matrix and its row/column ordering)
//! 68+L    ...   payload, rows * cols elements, row-major, re then im
//! ```
//!
//! Cached channel sets use the SHA-256 of their inputs as the content hash; plain
//! dumps hash the payload bytes.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::propagation::{AntennaArray, CMatrix, CarrierSet, ChannelSet, GainModel, STACK_ORDERING};
use crate::quadrature::QuadratureSpec;
use crate::scene::PixelGrid;

pub const MAGIC: &[u8; 8] = b"PXISACMT";
pub const FORMAT_VERSION: u32 = 1;

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "PIXEL_ISAC_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Complex64,
    Complex128,
}

impl Precision {
    fn code(self) -> u8 {
        match self {
            Precision::Complex64 => 1,
            Precision::Complex128 => 2,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(Precision::Complex64),
            2 => Ok(Precision::Complex128),
            other => Err(Error::MatrixFormat(format!("unknown element type {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRecord {
    pub label: String,
    pub hash: [u8; 32],
    pub precision: Precision,
    pub matrix: CMatrix,
}

impl MatrixRecord {
    /// Record whose hash is the SHA-256 of its complex128 payload.
    pub fn new(label: impl Into<String>, matrix: CMatrix) -> Self {
        let hash = payload_hash(&matrix);
        Self { label: label.into(), hash, precision: Precision::Complex128, matrix }
    }

    pub fn with_hash(label: impl Into<String>, matrix: CMatrix, hash: [u8; 32]) -> Self {
        Self { label: label.into(), hash, precision: Precision::Complex128, matrix }
    }
}

fn payload_hash(m: &CMatrix) -> [u8; 32] {
    let mut h = Sha256::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let v = m[(r, c)];
            h.update(v.re.to_le_bytes());
            h.update(v.im.to_le_bytes());
        }
    }
    h.finalize().into()
}

pub fn write_record(w: &mut impl Write, rec: &MatrixRecord) -> Result<()> {
    let (rows, cols) = rec.matrix.shape();
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&[rec.precision.code(), 0, 0, 0])?;
    w.write_all(&(rows as u64).to_le_bytes())?;
    w.write_all(&(cols as u64).to_le_bytes())?;
    w.write_all(&rec.hash)?;
    let label = rec.label.as_bytes();
    w.write_all(&(label.len() as u32).to_le_bytes())?;
    w.write_all(label)?;
    for r in 0..rows {
        for c in 0..cols {
            let v = rec.matrix[(r, c)];
            match rec.precision {
                Precision::Complex64 => {
                    w.write_all(&(v.re as f32).to_le_bytes())?;
                    w.write_all(&(v.im as f32).to_le_bytes())?;
                }
                Precision::Complex128 => {
                    w.write_all(&v.re.to_le_bytes())?;
                    w.write_all(&v.im.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

fn read_exact_or_eof(r: &mut impl Read, buf: &mut [u8]) -> Result<bool> {
    let mut filled = 0;
    while filled < buf.len() {
        let n = r.read(&mut buf[filled..])?;
        if n == 0 {
            if filled == 0 {
                return Ok(false);
            }
            return Err(Error::MatrixFormat("truncated record".into()));
        }
        filled += n;
    }
    Ok(true)
}

fn take<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|_| Error::MatrixFormat("truncated record".into()))?;
    Ok(b)
}

/// Reads the next record, or `None` at a clean end of stream.
pub fn read_record(r: &mut impl Read) -> Result<Option<MatrixRecord>> {
    let mut magic = [0u8; 8];
    if !read_exact_or_eof(r, &mut magic)? {
        return Ok(None);
    }
    if &magic != MAGIC {
        return Err(Error::MatrixFormat("bad magic".into()));
    }
    let version = u32::from_le_bytes(take::<4>(r)?);
    if version != FORMAT_VERSION {
        return Err(Error::MatrixFormat(format!("unsupported version {version}")));
    }
    let flags = take::<4>(r)?;
    let precision = Precision::from_code(flags[0])?;
    let rows = u64::from_le_bytes(take::<8>(r)?) as usize;
    let cols = u64::from_le_bytes(take::<8>(r)?) as usize;
    let hash = take::<32>(r)?;
    let label_len = u32::from_le_bytes(take::<4>(r)?) as usize;
    let mut label = vec![0u8; label_len];
    r.read_exact(&mut label).map_err(|_| Error::MatrixFormat("truncated label".into()))?;
    let label = String::from_utf8(label).map_err(|_| Error::MatrixFormat("label is not UTF-8".into()))?;
    let mut matrix = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            matrix[(i, j)] = match precision {
                Precision::Complex64 => Complex64::new(
                    f32::from_le_bytes(take::<4>(r)?) as f64,
                    f32::from_le_bytes(take::<4>(r)?) as f64,
                ),
                Precision::Complex128 => {
                    Complex64::new(f64::from_le_bytes(take::<8>(r)?), f64::from_le_bytes(take::<8>(r)?))
                }
            };
        }
    }
    Ok(Some(MatrixRecord { label, hash, precision, matrix }))
}

/// Writes records to `path` through a temporary file and a rename.
pub fn write_matrix_file(path: &Path, records: &[MatrixRecord]) -> Result<()> {
    crate::io::write_atomic(path, |w| {
        let mut w = BufWriter::new(w);
        for rec in records {
            write_record(&mut w, rec)?;
        }
        w.flush()?;
        Ok(())
    })
}

pub fn read_matrix_file(path: &Path) -> Result<Vec<MatrixRecord>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    while let Some(rec) = read_record(&mut r)? {
        out.push(rec);
    }
    Ok(out)
}

#[derive(Serialize)]
struct CacheKey<'a> {
    format: u32,
    grid: &'a PixelGrid,
    arrays: &'a AntennaArray,
    carriers: &'a CarrierSet,
    model: GainModel,
    quadrature: Option<&'a QuadratureSpec>,
}

/// Directory of assembled channel sets keyed by a hash of their inputs.
#[derive(Debug, Clone)]
pub struct ChannelCache {
    dir: PathBuf,
}

impl ChannelCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Uses `$PIXEL_ISAC_CACHE_DIR` when set, otherwise `fallback`.
    pub fn from_env_or(fallback: impl Into<PathBuf>) -> Self {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) if !dir.is_empty() => Self::new(dir),
            _ => Self::new(fallback),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(
        grid: &PixelGrid,
        arrays: &AntennaArray,
        carriers: &CarrierSet,
        model: GainModel,
        q: &QuadratureSpec,
    ) -> [u8; 32] {
        // The quadrature only matters for the integral model.
        let quadrature = (model == GainModel::Integral).then_some(q);
        let key = CacheKey { format: FORMAT_VERSION, grid, arrays, carriers, model, quadrature };
        let bytes = serde_json::to_vec(&key).expect("cache key serializes");
        Sha256::digest(bytes).into()
    }

    pub fn path_for(&self, key: &[u8; 32]) -> PathBuf {
        self.dir.join(format!("{}.pxm", hex::encode(key)))
    }

    pub fn load(&self, key: &[u8; 32]) -> Result<Option<ChannelSet>> {
        let path = self.path_for(key);
        if !path.exists() {
            return Ok(None);
        }
        let records = read_matrix_file(&path)?;
        if records.iter().any(|r| &r.hash != key) {
            return Err(Error::MatrixFormat(format!("{} has a mismatched content hash", path.display())));
        }
        let mut tx = Vec::new();
        let mut rx = Vec::new();
        let mut los = Vec::new();
        for rec in records {
            match rec.label.split_whitespace().next() {
                Some("H_Tx") => tx.push(rec.matrix),
                Some("H_Rx") => rx.push(rec.matrix),
                Some("H_LOS") => los.push(rec.matrix),
                _ => {}
            }
        }
        ChannelSet::from_parts(tx, rx, los).map(Some)
    }

    pub fn store(&self, key: &[u8; 32], channel: &ChannelSet) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(key);
        write_matrix_file(&path, &channel_records(channel, *key))?;
        Ok(path)
    }

    /// Loads the channel set for these inputs or assembles and stores it.
    pub fn get_or_assemble(
        &self,
        grid: &PixelGrid,
        arrays: &AntennaArray,
        carriers: &CarrierSet,
        model: GainModel,
        q: &QuadratureSpec,
    ) -> Result<ChannelSet> {
        let key = Self::key(grid, arrays, carriers, model, q);
        if let Some(ch) = self.load(&key)? {
            return Ok(ch);
        }
        let ch = crate::propagation::assemble_channel(grid, arrays, carriers, model, q)?;
        self.store(&key, &ch)?;
        Ok(ch)
    }
}

/// Every matrix of a channel set as labelled records sharing one hash.
pub fn channel_records(channel: &ChannelSet, hash: [u8; 32]) -> Vec<MatrixRecord> {
    let mut records = Vec::new();
    for k in 0..channel.n_carriers() {
        records.push(MatrixRecord::with_hash(
            format!("H_Tx k={k} rows=pixel cols=tx"),
            channel.tx_gains[k].clone(),
            hash,
        ));
        records.push(MatrixRecord::with_hash(
            format!("H_Rx k={k} rows=rx cols=pixel"),
            channel.rx_gains[k].clone(),
            hash,
        ));
        records.push(MatrixRecord::with_hash(format!("H_LOS k={k} rows=rx cols=tx"), channel.los[k].clone(), hash));
    }
    records.push(MatrixRecord::with_hash(
        format!("A rows={STACK_ORDERING} cols=pixel"),
        channel.measurement.clone(),
        hash,
    ));
    records
}
