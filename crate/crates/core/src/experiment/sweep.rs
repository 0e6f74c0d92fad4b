use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::output::{write_error_sweep, write_json, write_pixel_sweep, PixelSweepRow, Provenance};
use super::pipeline::{channel_for, default_cache, reconstruct, Scenario};
use crate::analysis::{default_proportions, sweep_proportion, ErrorConfig, SweepRow};
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::matfile::ChannelCache;
use crate::propagation::GainModel;

pub const MODELS: [GainModel; 2] = [GainModel::Conventional, GainModel::Integral];

/// MD/FA of both models for each pixel size. The whole geometry is scaled so
/// the grid keeps its pixel count; both models see the same ground truth, noise
/// and pilots.
pub fn pixel_size_rows(cfg: &ExperimentConfig, sizes: &[f64], cache: Option<&ChannelCache>) -> Result<Vec<PixelSweepRow>> {
    let mut rows = Vec::with_capacity(sizes.len() * MODELS.len());
    for &size in sizes {
        if !(size > 0.0) {
            return Err(Error::InvalidArgument(format!("pixel size {size} must be positive")));
        }
        let scaled = cfg.scaled(size / cfg.pixel.l_s);
        let scenario = Scenario::build(&scaled)?;
        for model in MODELS {
            let c = ExperimentConfig { model, ..scaled.clone() };
            let channel = channel_for(&scenario, &c, model, cache)?;
            let rec = reconstruct(&scenario, &c, &channel)?;
            rows.push(PixelSweepRow { size, model: model.as_str().to_string(), md: rec.metrics.md, fa: rec.metrics.fa });
        }
    }
    Ok(rows)
}

pub fn sweep_pixel_size(cfg: &ExperimentConfig, sizes: &[f64], out_dir: &Path) -> Result<(Vec<PixelSweepRow>, PathBuf)> {
    let cache = default_cache(out_dir);
    let rows = pixel_size_rows(cfg, sizes, Some(&cache))?;
    let path = out_dir.join("pixel_sweep.csv");
    let provenance = Provenance::new(cfg.hash()).with("geometry", "scaled with pixel size, grid fixed");
    write_pixel_sweep(&path, &provenance, &rows)?;
    Ok((rows, path))
}

/// Phase-error geometry derived from an experiment config.
pub fn error_config(cfg: &ExperimentConfig) -> Result<(ErrorConfig, Vec<f64>)> {
    let grid = cfg.grid()?;
    let a = &cfg.analysis;
    let antenna = match a.antenna {
        Some(p) => p,
        None => *cfg.arrays()?.tx.first().ok_or_else(|| Error::Config("no transmitters".into()))?,
    };
    let center = match a.pixel_center {
        Some(p) => p,
        None => {
            let roi = grid.roi();
            let idx = grid.index_of(&roi.center).unwrap_or(0);
            grid.center(idx)
        }
    };
    let [l, w] = a.pixel_size.unwrap_or([cfg.pixel.l_s, cfg.pixel.w_s]);
    let ec = ErrorConfig {
        antenna,
        pixel: Rect::new(center, l, w),
        target_length: l,
        target_width: w,
        wavelength: a.wavelength.unwrap_or_else(|| cfg.wavelength()),
        quadrature: a.quadrature.unwrap_or(cfg.quadrature),
    };
    ec.validate()?;
    Ok((ec, a.proportions.clone().unwrap_or_else(default_proportions)))
}

pub fn analyze_error(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(Vec<SweepRow>, PathBuf)> {
    let (ec, proportions) = error_config(cfg)?;
    let rows = sweep_proportion(&ec, &proportions)?;
    let path = out_dir.join("error_sweep.csv");
    let provenance = Provenance::new(cfg.hash())
        .with("antenna", format!("{} {}", ec.antenna.x, ec.antenna.y))
        .with("pixel", format!("center {} {} size {} {}", ec.pixel.center.x, ec.pixel.center.y, ec.pixel.length, ec.pixel.width));
    std::fs::create_dir_all(out_dir)?;
    write_error_sweep(&path, &provenance, &rows)?;
    Ok((rows, path))
}

/// Written next to a prebuilt matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembleManifest {
    pub config_hash: String,
    pub version: String,
    pub model: GainModel,
    pub key: String,
    pub path: PathBuf,
    pub rows: usize,
    pub cols: usize,
}

/// Builds (or finds) the cached channel set for `cfg.model`.
pub fn assemble_matrix(cfg: &ExperimentConfig, out_dir: &Path) -> Result<AssembleManifest> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let arrays = cfg.arrays()?;
    let carriers = cfg.carrier_set()?;
    let cache = default_cache(out_dir);
    let channel = cache.get_or_assemble(&grid, &arrays, &carriers, cfg.model, &cfg.quadrature)?;
    let key = ChannelCache::key(&grid, &arrays, &carriers, cfg.model, &cfg.quadrature);
    let manifest = AssembleManifest {
        config_hash: cfg.hash(),
        version: super::config::VERSION.to_string(),
        model: cfg.model,
        key: hex::encode(key),
        path: cache.path_for(&key),
        rows: channel.measurement.nrows(),
        cols: channel.measurement.ncols(),
    };
    std::fs::create_dir_all(out_dir)?;
    write_json(&out_dir.join("assemble.json"), &manifest)?;
    Ok(manifest)
}
