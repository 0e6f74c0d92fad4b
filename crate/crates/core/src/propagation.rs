//! Free-space propagation gains and measurement-matrix assembly.
//!
//! Two pixel models are supported. The conventional model evaluates the
//! point-to-point gain `lambda / (4 pi d) * exp(-2j pi d / lambda)` at the pixel
//! center; the integral model averages the same gain over the pixel area, so a
//! pixel larger than a wavelength carries the phase spread of its whole surface.
//!
//! The stacked measurement matrix `A` has one row block per `(k, n_t)` pair:
//! block `(k, n_t)` equals `H_rx[k] * diag(H_tx[k][:, n_t])`, so row
//! `(k * n_tx + n_t) * n_rx + n_r` pairs subcarrier `k`, transmitter `n_t` and
//! receiver `n_r`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};
use crate::quadrature::{rect_mean_multi, QuadratureSpec};
use crate::scene::PixelGrid;

pub type CMatrix = DMatrix<Complex64>;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Row ordering of the stacked measurement matrix and measurement vector.
pub const STACK_ORDERING: &str = "k outer, n_t middle, n_r inner: row = (k * n_tx + n_t) * n_rx + n_r";

const MIN_DISTANCE: f64 = 1e-12;

/// Uniformly spaced subcarriers centered on `center_frequency`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarrierSet {
    pub center_frequency: f64,
    pub count: usize,
    pub spacing: f64,
}

impl CarrierSet {
    pub fn new(center_frequency: f64, count: usize, spacing: f64) -> Result<Self> {
        let set = Self { center_frequency, count, spacing };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidArgument("need at least one subcarrier".into()));
        }
        if self.count > 1 && !(self.spacing > 0.0) {
            return Err(Error::InvalidArgument("subcarrier spacing must be positive".into()));
        }
        if self.frequencies().iter().any(|f| !(*f > 0.0 && f.is_finite())) {
            return Err(Error::InvalidArgument("all subcarrier frequencies must be positive".into()));
        }
        Ok(())
    }

    /// `f_k = f_c + (k - (K - 1) / 2) * spacing`, increasing in `k`.
    pub fn frequencies(&self) -> Vec<f64> {
        let mid = (self.count as f64 - 1.0) / 2.0;
        (0..self.count).map(|k| self.center_frequency + (k as f64 - mid) * self.spacing).collect()
    }

    pub fn wavelengths(&self) -> Vec<f64> {
        self.frequencies().into_iter().map(|f| SPEED_OF_LIGHT / f).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntennaArray {
    pub tx: Vec<Point2>,
    pub rx: Vec<Point2>,
}

impl AntennaArray {
    pub fn new(tx: Vec<Point2>, rx: Vec<Point2>) -> Self {
        Self { tx, rx }
    }

    pub fn n_tx(&self) -> usize {
        self.tx.len()
    }

    pub fn n_rx(&self) -> usize {
        self.rx.len()
    }

    /// Every antenna must be farther than one pixel diagonal from every pixel center.
    pub fn validate_against(&self, grid: &PixelGrid) -> Result<()> {
        if self.tx.is_empty() || self.rx.is_empty() {
            return Err(Error::InvalidArgument("need at least one Tx and one Rx".into()));
        }
        let diag = grid.pixel_diagonal();
        for (index, a) in self.tx.iter().chain(&self.rx).enumerate() {
            // Only pixels near the antenna can violate the bound.
            let probe = Rect::new(*a, 2.0 * diag, 2.0 * diag);
            if grid.pixels_touching(&probe).any(|n| grid.center(n).distance(a) <= diag) {
                return Err(Error::AntennaTooClose { index });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainModel {
    /// Point gain at the pixel center.
    Conventional,
    /// Pixel-averaged gain.
    Integral,
}

impl GainModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            GainModel::Conventional => "conventional",
            GainModel::Integral => "integral",
        }
    }
}

#[inline]
fn free_space(distance: f64, wavelength: f64) -> Complex64 {
    let amplitude = wavelength / (4.0 * std::f64::consts::PI * distance);
    let (s, c) = (-2.0 * std::f64::consts::PI * distance / wavelength).sin_cos();
    Complex64::new(amplitude * c, amplitude * s)
}

/// Point-to-point free-space gain between an antenna and a scatterer.
pub fn point_gain(antenna: Point2, target: Point2, wavelength: f64) -> Result<Complex64> {
    let d = antenna.distance(&target);
    if d < MIN_DISTANCE {
        return Err(Error::CoincidentPoints { distance: d });
    }
    Ok(free_space(d, wavelength))
}

/// Direct-path gain between a transmitter and a receiver.
pub fn los_gain(tx: Point2, rx: Point2, wavelength: f64) -> Result<Complex64> {
    point_gain(tx, rx, wavelength)
}

/// Pixel-averaged gain for several wavelengths at once; refinement continues
/// until every wavelength meets the tolerance.
pub fn integral_gains(antenna: Point2, pixel: &Rect, wavelengths: &[f64], q: &QuadratureSpec) -> Result<Vec<Complex64>> {
    if pixel.contains_closed(&antenna) {
        return Err(Error::AntennaInsidePixel { x: antenna.x, y: antenna.y });
    }
    let mean = rect_mean_multi(pixel, q, wavelengths.len(), |p, out: &mut [Complex64]| {
        let d = antenna.distance(&p);
        for (o, lambda) in out.iter_mut().zip(wavelengths) {
            *o = free_space(d, *lambda);
        }
    })?;
    Ok(mean.values)
}

pub fn integral_gain(antenna: Point2, pixel: &Rect, wavelength: f64, q: &QuadratureSpec) -> Result<Complex64> {
    Ok(integral_gains(antenna, pixel, &[wavelength], q)?[0])
}

/// Gains from one antenna to one pixel for all subcarriers under `model`.
pub fn pixel_gains(
    antenna: Point2,
    grid: &PixelGrid,
    pixel: usize,
    wavelengths: &[f64],
    model: GainModel,
    q: &QuadratureSpec,
) -> Result<Vec<Complex64>> {
    match model {
        GainModel::Conventional => {
            let c = grid.center(pixel);
            wavelengths.iter().map(|l| point_gain(antenna, c, *l)).collect()
        }
        GainModel::Integral => integral_gains(antenna, &grid.pixel_rect(pixel), wavelengths, q),
    }
}

/// Per-subcarrier propagation matrices and the stacked measurement matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// `N_s x N_T` per subcarrier.
    pub tx_gains: Vec<CMatrix>,
    /// `N_R x N_s` per subcarrier.
    pub rx_gains: Vec<CMatrix>,
    /// `N_R x N_T` per subcarrier.
    pub los: Vec<CMatrix>,
    /// `(K N_T N_R) x N_s`.
    pub measurement: CMatrix,
}

impl ChannelSet {
    pub fn from_parts(tx_gains: Vec<CMatrix>, rx_gains: Vec<CMatrix>, los: Vec<CMatrix>) -> Result<Self> {
        let k = tx_gains.len();
        if k == 0 || rx_gains.len() != k || los.len() != k {
            return Err(Error::DimMismatch("per-subcarrier matrix counts differ".into()));
        }
        let (n_s, n_t) = tx_gains[0].shape();
        let n_r = rx_gains[0].nrows();
        for i in 0..k {
            if tx_gains[i].shape() != (n_s, n_t) || rx_gains[i].shape() != (n_r, n_s) || los[i].shape() != (n_r, n_t) {
                return Err(Error::DimMismatch(format!("subcarrier {i} has inconsistent shapes")));
            }
        }
        let mut measurement = CMatrix::zeros(k * n_t * n_r, n_s);
        for kk in 0..k {
            for t in 0..n_t {
                let base = (kk * n_t + t) * n_r;
                for n in 0..n_s {
                    let g_tx = tx_gains[kk][(n, t)];
                    for r in 0..n_r {
                        measurement[(base + r, n)] = rx_gains[kk][(r, n)] * g_tx;
                    }
                }
            }
        }
        Ok(Self { tx_gains, rx_gains, los, measurement })
    }

    pub fn n_carriers(&self) -> usize {
        self.tx_gains.len()
    }

    pub fn n_pixels(&self) -> usize {
        self.measurement.ncols()
    }

    pub fn n_tx(&self) -> usize {
        self.tx_gains[0].ncols()
    }

    pub fn n_rx(&self) -> usize {
        self.rx_gains[0].nrows()
    }

    /// Row block `(k, n_t)` of the measurement matrix.
    pub fn block(&self, k: usize, t: usize) -> CMatrix {
        let n_r = self.n_rx();
        self.measurement.rows((k * self.n_tx() + t) * n_r, n_r).into_owned()
    }

    /// Factorized multipath prediction `H_rx diag(x) H_tx` for subcarrier `k`.
    pub fn predicted_multipath(&self, k: usize, x: &[f64]) -> CMatrix {
        let mut scaled = self.tx_gains[k].clone();
        for (mut row, xi) in scaled.row_iter_mut().zip(x) {
            row *= Complex64::new(*xi, 0.0);
        }
        &self.rx_gains[k] * scaled
    }
}

/// Direct-path matrices `N_R x N_T`, one per subcarrier.
pub fn los_matrices(arrays: &AntennaArray, carriers: &CarrierSet) -> Result<Vec<CMatrix>> {
    carriers
        .wavelengths()
        .iter()
        .map(|lambda| {
            let mut h = CMatrix::zeros(arrays.n_rx(), arrays.n_tx());
            for (r, rx) in arrays.rx.iter().enumerate() {
                for (t, tx) in arrays.tx.iter().enumerate() {
                    h[(r, t)] = los_gain(*tx, *rx, *lambda)?;
                }
            }
            Ok(h)
        })
        .collect()
}

/// Builds every propagation matrix for the scene. Pixels are evaluated in
/// parallel and written to disjoint entries, so the result does not depend on
/// the thread count.
pub fn assemble_channel(
    grid: &PixelGrid,
    arrays: &AntennaArray,
    carriers: &CarrierSet,
    model: GainModel,
    q: &QuadratureSpec,
) -> Result<ChannelSet> {
    carriers.validate()?;
    q.validate()?;
    arrays.validate_against(grid)?;
    let wavelengths = carriers.wavelengths();
    let n_k = wavelengths.len();
    let antennas: Vec<Point2> = arrays.tx.iter().chain(&arrays.rx).copied().collect();

    let per_pixel: Vec<Vec<Complex64>> = (0..grid.n_pixels())
        .into_par_iter()
        .map(|n| {
            let mut out = Vec::with_capacity(antennas.len() * n_k);
            for a in &antennas {
                out.extend(pixel_gains(*a, grid, n, &wavelengths, model, q)?);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let n_s = grid.n_pixels();
    let (n_t, n_r) = (arrays.n_tx(), arrays.n_rx());
    let mut tx_gains = vec![CMatrix::zeros(n_s, n_t); n_k];
    let mut rx_gains = vec![CMatrix::zeros(n_r, n_s); n_k];
    for (n, gains) in per_pixel.iter().enumerate() {
        for k in 0..n_k {
            for t in 0..n_t {
                tx_gains[k][(n, t)] = gains[t * n_k + k];
            }
            for r in 0..n_r {
                rx_gains[k][(r, n)] = gains[(n_t + r) * n_k + k];
            }
        }
    }
    ChannelSet::from_parts(tx_gains, rx_gains, los_matrices(arrays, carriers)?)
}
