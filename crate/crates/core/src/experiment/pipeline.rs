//! simulate -> estimate -> reconstruct -> score.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{AutoKeyword, ExperimentConfig, NumberOr, SigmaWKeyword};
use super::output::{write_json, write_reconstruction, Provenance, ReconstructionRow};
use crate::error::Result;
use crate::estimation::{cancel_los, estimate_all, stack_measurements, MeasurementVector};
use crate::forward::{make_pilots, simulate_received, true_channel, PilotBlock, ReceivedBlock, SnrReference};
use crate::gamp::{estimate_noise_blind, realify, run_gamp, GampDiagnostics, RVector};
use crate::geometry::Point2;
use crate::matfile::{write_matrix_file, ChannelCache, MatrixRecord};
use crate::metrics::{nmse_db, score, MetricsReport};
use crate::propagation::{assemble_channel, los_matrices, AntennaArray, CMatrix, CarrierSet, ChannelSet, GainModel, STACK_ORDERING};
use crate::scene::{FineCloud, PixelGrid, ScatterField, PIXEL_ORDERING};

/// Everything about a run that does not depend on the gain model.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: PixelGrid,
    pub field: ScatterField,
    pub cloud: FineCloud,
    pub arrays: AntennaArray,
    pub carriers: CarrierSet,
    pub pilots: PilotBlock,
    pub los: Vec<CMatrix>,
    pub nlos: Vec<CMatrix>,
    pub received: ReceivedBlock,
    /// LOS-cancelled LS estimates, stacked.
    pub measurement: MeasurementVector,
}

impl Scenario {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid()?;
        let field = ScatterField::place_targets(&grid, &cfg.targets)?;
        let cloud = field.rasterize_fine(cfg.oracle.subdivision)?;
        let arrays = cfg.arrays()?;
        arrays.validate_against(&grid)?;
        let carriers = cfg.carrier_set()?;
        let pilots = make_pilots(arrays.n_tx(), cfg.pilots.length, carriers.count, cfg.seed)?;
        let los = los_matrices(&arrays, &carriers)?;
        let nlos = true_channel(&cloud, &arrays, &carriers, cfg.oracle.coupling)?;
        let received = simulate_received(&nlos, &los, &pilots, cfg.noise(), cfg.snr_reference, cfg.seed)?;
        let estimates = estimate_all(&received.y, &pilots)?;
        let measurement = stack_measurements(&cancel_los(&estimates, &los)?)?;
        Ok(Self { grid, field, cloud, arrays, carriers, pilots, los, nlos, received, measurement })
    }
}

/// Contents of `diagnostics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineDiagnostics {
    pub config_hash: String,
    pub version: String,
    pub model: GainModel,
    pub pixel_ordering: String,
    pub stack_ordering: String,
    pub n_pixels: usize,
    pub n_measurements: usize,
    pub tx_positions: Vec<Point2>,
    pub rx_positions: Vec<Point2>,
    pub fine_points: usize,
    pub noise_variance: f64,
    pub snr_db: Option<f64>,
    pub snr_reference: SnrReference,
    /// Mean per-entry power of `H S` for the multipath and direct components.
    pub nlos_power: f64,
    pub los_power: f64,
    /// `|A x_true - h_nlos| / |h_nlos|`: how far the true multipath is from the model's prediction.
    pub model_mismatch: Option<f64>,
    /// Scale applied to the realified system before the solver.
    pub normalization: f64,
    /// Per-component noise variance of the unscaled realified measurement.
    pub sigma_w: f64,
    pub gamp: GampDiagnostics,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub x_hat: Vec<f64>,
    pub detected: Vec<bool>,
    pub metrics: MetricsReport,
    pub diagnostics: PipelineDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub config_hash: String,
    pub version: String,
    #[serde(flatten)]
    pub metrics: MetricsReport,
}

/// Measurement matrices for one gain model, read from or stored in `cache` when given.
pub fn channel_for(
    scenario: &Scenario,
    cfg: &ExperimentConfig,
    model: GainModel,
    cache: Option<&ChannelCache>,
) -> Result<ChannelSet> {
    match cache {
        Some(c) => c.get_or_assemble(&scenario.grid, &scenario.arrays, &scenario.carriers, model, &cfg.quadrature),
        None => assemble_channel(&scenario.grid, &scenario.arrays, &scenario.carriers, model, &cfg.quadrature),
    }
}

fn stacked_norm(v: &[num_complex::Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Runs the solver for one model on a prepared scenario.
pub fn reconstruct(scenario: &Scenario, cfg: &ExperimentConfig, channel: &ChannelSet) -> Result<Reconstruction> {
    let a = &channel.measurement;
    let (mut a_r, mut h_r) = realify(a, &scenario.measurement.values)?;

    let n = a_r.ncols();
    let energy = a_r.iter().map(|v| v * v).sum::<f64>() / n.max(1) as f64;
    let c = if energy > 0.0 { 1.0 / energy.sqrt() } else { 1.0 };
    a_r *= c;
    h_r *= c;

    let t = scenario.pilots.length() as f64;
    let sigma_w_raw = match cfg.gamp.sigma_w {
        NumberOr::Number(v) => v,
        NumberOr::Keyword(SigmaWKeyword::Auto) => scenario.received.noise_variance / (2.0 * t),
        NumberOr::Keyword(SigmaWKeyword::Blind) => estimate_noise_blind(h_r.as_slice()) / (c * c),
    };
    let sigma_w = sigma_w_raw * c * c;
    let h_abs: f64 = h_r.iter().map(|v| v.abs()).sum();
    let tolerance = match cfg.gamp.tol {
        NumberOr::Number(v) => v,
        NumberOr::Keyword(AutoKeyword::Auto) => {
            h_r.len() as f64 * (2.0 * sigma_w / std::f64::consts::PI).sqrt() + 1e-9 * h_abs + f64::MIN_POSITIVE
        }
    };

    let out = run_gamp(&a_r, &h_r, &cfg.gamp.prior()?, &cfg.gamp.solver(sigma_w, tolerance))?;
    let x_true = scenario.field.coefficients();
    let (metrics, detected) = score(&out.x, x_true, scenario.field.occupancy(), cfg.threshold)?;
    let mut gamp = out.diagnostics;
    gamp.nmse_db = Some(nmse_db(&out.x, x_true)?).filter(|v| v.is_finite());

    let predicted = a * RVector::from_column_slice(x_true).map(|v| num_complex::Complex64::new(v, 0.0));
    let nlos_stack = stack_measurements(&scenario.nlos)?;
    let nlos_norm = stacked_norm(&nlos_stack.values);
    let model_mismatch = (nlos_norm > 0.0).then(|| {
        let diff: Vec<_> = predicted.iter().zip(&nlos_stack.values).map(|(p, h)| p - h).collect();
        stacked_norm(&diff) / nlos_norm
    });

    let diagnostics = PipelineDiagnostics {
        config_hash: cfg.hash(),
        version: super::config::VERSION.to_string(),
        model: cfg.model,
        pixel_ordering: PIXEL_ORDERING.to_string(),
        stack_ordering: STACK_ORDERING.to_string(),
        n_pixels: scenario.grid.n_pixels(),
        n_measurements: a.nrows(),
        tx_positions: scenario.arrays.tx.clone(),
        rx_positions: scenario.arrays.rx.clone(),
        fine_points: scenario.cloud.len(),
        noise_variance: scenario.received.noise_variance,
        snr_db: scenario.received.snr_db,
        snr_reference: scenario.received.reference,
        nlos_power: crate::forward::mean_signal_power(&scenario.nlos, &scenario.pilots),
        los_power: crate::forward::mean_signal_power(&scenario.los, &scenario.pilots),
        model_mismatch,
        normalization: c,
        sigma_w: sigma_w_raw,
        gamp,
    };
    Ok(Reconstruction { x_hat: out.x, detected, metrics, diagnostics })
}

/// Cache directory: `$PIXEL_ISAC_CACHE_DIR`, else `<out_dir>/cache`.
pub fn default_cache(out_dir: &Path) -> ChannelCache {
    ChannelCache::from_env_or(out_dir.join("cache"))
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub scenario: Scenario,
    pub reconstruction: Reconstruction,
    pub files: Vec<PathBuf>,
}

/// Full run writing `reconstruction.csv`, `metrics.json` and `diagnostics.json` to `out_dir`.
pub fn run_pipeline(cfg: &ExperimentConfig, out_dir: &Path) -> Result<PipelineResult> {
    let scenario = Scenario::build(cfg)?;
    let cache = default_cache(out_dir);
    let channel = channel_for(&scenario, cfg, cfg.model, Some(&cache))?;
    let rec = reconstruct(&scenario, cfg, &channel)?;
    let files = write_outputs(cfg, &scenario, &rec, out_dir)?;
    Ok(PipelineResult { scenario, reconstruction: rec, files })
}

pub fn write_outputs(cfg: &ExperimentConfig, scenario: &Scenario, rec: &Reconstruction, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let hash = cfg.hash();
    let provenance = Provenance::new(&hash)
        .with("model", cfg.model.as_str())
        .with("pixel_ordering", PIXEL_ORDERING)
        .with("threshold", cfg.threshold.to_string());
    let x_true = scenario.field.coefficients();
    let rows: Vec<ReconstructionRow> = (0..scenario.grid.n_pixels())
        .map(|i| {
            let (row, col) = scenario.grid.row_col(i);
            ReconstructionRow { row, col, x_true: x_true[i], x_hat: rec.x_hat[i], detected: rec.detected[i] as u8 }
        })
        .collect();

    let mut files = vec![out_dir.join("reconstruction.csv"), out_dir.join("metrics.json"), out_dir.join("diagnostics.json")];
    write_reconstruction(&files[0], &provenance, &rows)?;
    let metrics = MetricsFile { config_hash: hash, version: super::config::VERSION.to_string(), metrics: rec.metrics.clone() };
    write_json(&files[1], &metrics)?;
    write_json(&files[2], &rec.diagnostics)?;

    if cfg.dump_matrices {
        let path = out_dir.join("received.pxm");
        let mut records = Vec::new();
        for k in 0..scenario.carriers.count {
            records.push(MatrixRecord::new(format!("Y k={k} rows=rx cols=sample"), scenario.received.y[k].clone()));
            records.push(MatrixRecord::new(format!("S k={k} rows=tx cols=sample"), scenario.pilots.get(k).clone()));
            records.push(MatrixRecord::new(format!("H_NLOS k={k} rows=rx cols=tx"), scenario.nlos[k].clone()));
            records.push(MatrixRecord::new(format!("H_LOS k={k} rows=rx cols=tx"), scenario.los[k].clone()));
        }
        write_matrix_file(&path, &records)?;
        files.push(path);
    }
    Ok(files)
}
