//! Generalized approximate message passing for real, non-negative, bounded
//! reflectivity under a truncated Bernoulli-Gaussian prior.

mod prior;
mod solver;

pub use prior::{
    g_in, log_normal_pdf, norm_cdf, norm_pdf, norm_sf, truncated_normal, Denoiser, InputEstimate, PriorParams,
    Truncated, SPIKE_WIDTH, VARIANCE_FLOOR,
};
pub use solver::{run_gamp, GampConfig, GampDiagnostics, GampOutput, GampState, DEFAULT_DAMPING};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::propagation::CMatrix;

pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

/// Stacks real parts over imaginary parts: `[Re A; Im A]`, `[Re h; Im h]`.
pub fn realify(a: &CMatrix, h: &[Complex64]) -> Result<(RMatrix, RVector)> {
    if a.nrows() != h.len() {
        return Err(Error::DimMismatch(format!("matrix has {} rows, vector has {}", a.nrows(), h.len())));
    }
    let m = a.nrows();
    let a_r = RMatrix::from_fn(2 * m, a.ncols(), |i, j| if i < m { a[(i, j)].re } else { a[(i - m, j)].im });
    let h_r = RVector::from_fn(2 * m, |i, _| if i < m { h[i].re } else { h[i - m].im });
    Ok((a_r, h_r))
}

/// Realified complex vector.
pub fn realify_vector(h: &[Complex64]) -> RVector {
    let m = h.len();
    RVector::from_fn(2 * m, |i, _| if i < m { h[i].re } else { h[i - m].im })
}

/// `(y - q) / (sigma_w + sigma_z)`.
pub fn g_out(y: f64, q: f64, sigma_z: f64, sigma_w: f64) -> Result<f64> {
    let d = sigma_w + sigma_z;
    if !(d > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok((y - q) / d)
}

/// Derivative of [`g_out`] with respect to `q`'s argument, `-1 / (sigma_w + sigma_z)`.
pub fn g_out_deriv(sigma_z: f64, sigma_w: f64) -> Result<f64> {
    let d = sigma_w + sigma_z;
    if !(d > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok(-1.0 / d)
}

/// Half-normal 10% quantile: `|N(0,1)|` falls below this with probability 0.1.
const HALF_NORMAL_Q10: f64 = 0.125_661_346_855_074_1;

/// Blind per-component noise variance from the smallest 10% of `|h|`.
pub fn estimate_noise_blind(h: &[f64]) -> f64 {
    if h.is_empty() {
        return 0.0;
    }
    let mut mags: Vec<f64> = h.iter().map(|v| v.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let idx = ((mags.len() as f64 * 0.1).ceil() as usize).saturating_sub(1);
    (mags[idx] / HALF_NORMAL_Q10).powi(2)
}
