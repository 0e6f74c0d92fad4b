//! Least-squares channel estimation, LOS cancellation and measurement stacking.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::PilotBlock;
use crate::propagation::CMatrix;

/// Largest accepted condition number of `S S^H`.
pub const MAX_PILOT_CONDITION: f64 = 1e8;

/// `H = Y S^H (S S^H)^-1`.
pub fn estimate_channel(y: &CMatrix, s: &CMatrix) -> Result<CMatrix> {
    if y.ncols() != s.ncols() {
        return Err(Error::DimMismatch(format!(
            "received block has {} samples, pilots have {}",
            y.ncols(),
            s.ncols()
        )));
    }
    let s_h = s.adjoint();
    let gram = s * &s_h;
    let eig = SymmetricEigen::new(gram);
    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= MAX_PILOT_CONDITION) {
        return Err(Error::SingularPilots { condition });
    }
    let v = &eig.eigenvectors;
    let inv_diag = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(1.0 / l, 0.0)));
    let gram_inv = v * inv_diag * v.adjoint();
    Ok(y * s_h * gram_inv)
}

/// Per-subcarrier LS estimates.
pub fn estimate_all(y: &[CMatrix], pilots: &PilotBlock) -> Result<Vec<CMatrix>> {
    if y.len() != pilots.matrices().len() {
        return Err(Error::DimMismatch(format!("{} received blocks for {} pilot matrices", y.len(), pilots.matrices().len())));
    }
    y.iter().zip(pilots.matrices()).map(|(y, s)| estimate_channel(y, s)).collect()
}

/// Subtracts the known LOS channel from each estimate.
pub fn cancel_los(estimates: &[CMatrix], los: &[CMatrix]) -> Result<Vec<CMatrix>> {
    if estimates.len() != los.len() {
        return Err(Error::DimMismatch(format!("{} estimates for {} LOS matrices", estimates.len(), los.len())));
    }
    estimates
        .iter()
        .zip(los)
        .enumerate()
        .map(|(k, (h, l))| {
            if h.shape() != l.shape() {
                return Err(Error::DimMismatch(format!("subcarrier {k}: estimate {:?} vs LOS {:?}", h.shape(), l.shape())));
            }
            Ok(h - l)
        })
        .collect()
}

/// Subcarrier matrices stacked into one vector, entry `(k*N_T + t)*N_R + r`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector {
    pub values: Vec<Complex64>,
    pub n_carriers: usize,
    pub n_tx: usize,
    pub n_rx: usize,
}

impl MeasurementVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn stack_measurements(blocks: &[CMatrix]) -> Result<MeasurementVector> {
    let first = blocks.first().ok_or_else(|| Error::InconsistentBlockDims("no blocks".into()))?;
    let (n_rx, n_tx) = first.shape();
    let mut values = Vec::with_capacity(blocks.len() * n_rx * n_tx);
    for (k, b) in blocks.iter().enumerate() {
        if b.shape() != (n_rx, n_tx) {
            return Err(Error::InconsistentBlockDims(format!("block {k} is {:?}, expected {:?}", b.shape(), (n_rx, n_tx))));
        }
        // nalgebra storage is column-major, which is exactly t-outer, r-inner.
        values.extend_from_slice(b.as_slice());
    }
    Ok(MeasurementVector { values, n_carriers: blocks.len(), n_tx, n_rx })
}

pub fn unstack(v: &MeasurementVector) -> Result<Vec<CMatrix>> {
    let block = v.n_rx * v.n_tx;
    if v.values.len() != block * v.n_carriers {
        return Err(Error::InconsistentBlockDims(format!(
            "{} values for {} blocks of {}x{}",
            v.values.len(),
            v.n_carriers,
            v.n_rx,
            v.n_tx
        )));
    }
    Ok(v.values.chunks(block.max(1)).take(v.n_carriers).map(|c| CMatrix::from_column_slice(v.n_rx, v.n_tx, c)).collect())
}
