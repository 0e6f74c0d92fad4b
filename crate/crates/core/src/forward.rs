//! Physical ground truth: received pilot blocks synthesized from a fine cloud of
//! point scatterers rather than from the pixel model being evaluated.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::{point_gain, AntennaArray, CMatrix, CarrierSet};
use crate::scene::FineCloud;

const PILOT_DOMAIN: u64 = 1;
const NOISE_DOMAIN: u64 = 2;

/// Deterministic per-subcarrier stream derived from a master seed.
pub fn stream_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 32) | index);
    rng
}

/// Pilot matrices `S_k` (`N_T x T`) with `S_k S_k^H = T I`.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotBlock {
    matrices: Vec<CMatrix>,
    length: usize,
}

impl PilotBlock {
    pub fn new(matrices: Vec<CMatrix>) -> Result<Self> {
        let length = matrices.first().map(|m| m.ncols()).unwrap_or(0);
        if matrices.iter().any(|m| m.ncols() != length || m.nrows() != matrices[0].nrows()) {
            return Err(Error::DimMismatch("pilot matrices must share one shape".into()));
        }
        Ok(Self { matrices, length })
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn get(&self, k: usize) -> &CMatrix {
        &self.matrices[k]
    }

    pub fn length(&self) -> usize {
        self.length
    }
}

/// Orthogonal pilots: `n_tx` distinct rows of the `length`-point DFT matrix with
/// a random unit phase per column, drawn independently per subcarrier.
pub fn make_pilots(n_tx: usize, length: usize, n_carriers: usize, seed: u64) -> Result<PilotBlock> {
    if length < n_tx {
        return Err(Error::TooShortSequence { n_tx, length });
    }
    if n_tx == 0 {
        return Err(Error::InvalidArgument("need at least one transmitter".into()));
    }
    let matrices = (0..n_carriers)
        .map(|k| {
            let mut rng = stream_rng(seed, PILOT_DOMAIN, k as u64);
            let rows = sample(&mut rng, length, n_tx).into_vec();
            let phases: Vec<Complex64> = (0..length)
                .map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU))
                .collect();
            CMatrix::from_fn(n_tx, length, |i, j| {
                let angle = -std::f64::consts::TAU * ((rows[i] * j) % length) as f64 / length as f64;
                Complex64::from_polar(1.0, angle) * phases[j]
            })
        })
        .collect();
    PilotBlock::new(matrices)
}

/// How cloud points combine into the multipath channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// `sum_p w_p g_rx(p) g_tx(p)`: each scatterer re-radiates what it receives.
    #[default]
    PerPoint,
    /// `sum_n (sum_{p in n} w_p g_rx(p)) (sum_{p in n} w_p g_tx(p)) / sum_{p in n} w_p`:
    /// transmit and receive gains are averaged over each pixel separately, the
    /// factorization the pixel model assumes.
    PerPixel,
}

/// Multipath matrices `N_R x N_T` per subcarrier from a cloud of point scatterers.
pub fn true_channel(
    cloud: &FineCloud,
    arrays: &AntennaArray,
    carriers: &CarrierSet,
    coupling: Coupling,
) -> Result<Vec<CMatrix>> {
    let wavelengths = carriers.wavelengths();
    let (n_t, n_r) = (arrays.n_tx(), arrays.n_rx());
    wavelengths
        .par_iter()
        .map(|&lambda| {
            let mut h = CMatrix::zeros(n_r, n_t);
            let mut g_t = vec![Complex64::new(0.0, 0.0); n_t];
            let mut g_r = vec![Complex64::new(0.0, 0.0); n_r];
            match coupling {
                Coupling::PerPoint => {
                    for p in cloud.points() {
                        for (g, a) in g_t.iter_mut().zip(&arrays.tx) {
                            *g = point_gain(*a, p.position, lambda)? * p.weight;
                        }
                        for (g, a) in g_r.iter_mut().zip(&arrays.rx) {
                            *g = point_gain(*a, p.position, lambda)?;
                        }
                        accumulate_outer(&mut h, &g_r, &g_t, 1.0);
                    }
                }
                Coupling::PerPixel => {
                    let mut pts: Vec<_> = cloud.points().to_vec();
                    pts.sort_by_key(|p| p.pixel);
                    for group in pts.chunk_by(|a, b| a.pixel == b.pixel) {
                        g_t.iter_mut().chain(g_r.iter_mut()).for_each(|g| *g = Complex64::new(0.0, 0.0));
                        let mut total = 0.0;
                        for p in group {
                            total += p.weight;
                            for (g, a) in g_t.iter_mut().zip(&arrays.tx) {
                                *g += point_gain(*a, p.position, lambda)? * p.weight;
                            }
                            for (g, a) in g_r.iter_mut().zip(&arrays.rx) {
                                *g += point_gain(*a, p.position, lambda)? * p.weight;
                            }
                        }
                        if total > 0.0 {
                            accumulate_outer(&mut h, &g_r, &g_t, 1.0 / total);
                        }
                    }
                }
            }
            Ok(h)
        })
        .collect()
}

fn accumulate_outer(h: &mut CMatrix, g_r: &[Complex64], g_t: &[Complex64], scale: f64) {
    for (t, gt) in g_t.iter().enumerate() {
        let gt = gt * scale;
        for (r, gr) in g_r.iter().enumerate() {
            h[(r, t)] += gr * gt;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseSpec {
    Noiseless,
    /// Noise power set from the reference signal power.
    SnrDb(f64),
    /// Explicit per-entry complex noise variance.
    Variance(f64),
}

/// Which part of the received signal an SNR refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrReference {
    /// LOS plus NLOS.
    #[default]
    Total,
    /// Scatterer-induced (NLOS) component only.
    Multipath,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock {
    /// `N_R x T` per subcarrier.
    pub y: Vec<CMatrix>,
    /// Complex noise variance per entry, `E|n|^2`.
    pub noise_variance: f64,
    pub snr_db: Option<f64>,
    pub reference: SnrReference,
}

/// Mean `|.|^2` per entry of `H_k S_k` across subcarriers.
pub fn mean_signal_power(channels: &[CMatrix], pilots: &PilotBlock) -> f64 {
    let mut energy = 0.0;
    let mut count = 0usize;
    for (h, s) in channels.iter().zip(pilots.matrices()) {
        let hs = h * s;
        energy += hs.norm_squared();
        count += hs.len();
    }
    if count == 0 {
        0.0
    } else {
        energy / count as f64
    }
}

/// `Y_k = (H_nlos_k + H_los_k) S_k + N_k` with i.i.d. circular Gaussian noise.
pub fn simulate_received(
    nlos: &[CMatrix],
    los: &[CMatrix],
    pilots: &PilotBlock,
    noise: NoiseSpec,
    reference: SnrReference,
    seed: u64,
) -> Result<ReceivedBlock> {
    let k = nlos.len();
    if los.len() != k || pilots.matrices().len() != k {
        return Err(Error::DimMismatch("subcarrier counts of NLOS, LOS and pilots differ".into()));
    }
    let mut total = Vec::with_capacity(k);
    for (i, (n, l)) in nlos.iter().zip(los).enumerate() {
        if n.shape() != l.shape() || n.ncols() != pilots.get(i).nrows() {
            return Err(Error::DimMismatch(format!("subcarrier {i}: channel and pilot shapes disagree")));
        }
        total.push(n + l);
    }

    let (noise_variance, snr_db) = match noise {
        NoiseSpec::Noiseless => (0.0, None),
        NoiseSpec::Variance(v) if v >= 0.0 => (v, None),
        NoiseSpec::Variance(v) => return Err(Error::InvalidArgument(format!("negative noise variance {v}"))),
        NoiseSpec::SnrDb(snr) => {
            let power = match reference {
                SnrReference::Multipath => mean_signal_power(nlos, pilots),
                SnrReference::Total => mean_signal_power(&total, pilots),
            };
            (power * 10f64.powf(-snr / 10.0), Some(snr))
        }
    };

    let sigma = (0.5 * noise_variance).sqrt();
    let y = total
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let mut y = h * pilots.get(i);
            if noise_variance > 0.0 {
                let mut rng = stream_rng(seed, NOISE_DOMAIN, i as u64);
                // Column-major fill keeps the draw order fixed.
                for v in y.iter_mut() {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *v += Complex64::new(sigma * re, sigma * im);
                }
            }
            y
        })
        .collect();
    Ok(ReceivedBlock { y, noise_variance, snr_db, reference })
}
