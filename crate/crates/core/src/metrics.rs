//! Detection scoring: peak normalization, thresholding, miss/false-alarm rates and NMSE.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
/// Estimates whose peak does not exceed this are treated as all-zero.
/// Coefficients live on [0, 1]; a peak this small is solver residue, and
/// scaling it to one would turn residue into detections.
pub const ZERO_ESTIMATE_FLOOR: f64 = 1e-6;

pub const FLAG_ALL_ZERO: &str = "all_zero_estimate";
pub const FLAG_NMSE_EXACT: &str = "nmse_exact_match";
pub const FLAG_NMSE_ZERO_TRUTH: &str = "nmse_zero_truth";
pub const FLAG_NO_OCCUPIED: &str = "md_undefined_no_occupied";
pub const FLAG_NO_EMPTY: &str = "fa_undefined_no_empty";

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub values: Vec<f64>,
    /// True when there was no positive entry to scale by.
    pub all_zero: bool,
}

/// Scales `x` so its largest entry is one.
pub fn normalize(x: &[f64]) -> Normalized {
    let peak = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if peak > ZERO_ESTIMATE_FLOOR {
        Normalized { values: x.iter().map(|v| v / peak).collect(), all_zero: false }
    } else {
        Normalized { values: x.to_vec(), all_zero: true }
    }
}

/// `value >= threshold`.
pub fn detect(x: &[f64], threshold: f64) -> Vec<bool> {
    x.iter().map(|v| *v >= threshold).collect()
}

fn check_lengths(detected: &[bool], truth: &[bool]) -> Result<()> {
    if detected.len() != truth.len() {
        return Err(Error::DimMismatch(format!("{} detections for {} pixels", detected.len(), truth.len())));
    }
    Ok(())
}

/// Missed-detection and false-alarm rates.
pub fn md_fa(detected: &[bool], truth: &[bool]) -> Result<(f64, f64)> {
    let (md, fa) = md_fa_lenient(detected, truth)?;
    match (md, fa) {
        (Some(md), Some(fa)) => Ok((md, fa)),
        (None, _) => Err(Error::DegenerateTruth("no occupied pixels")),
        (_, None) => Err(Error::DegenerateTruth("no empty pixels")),
    }
}

/// Like [`md_fa`] but reports an undefined rate as `None`.
pub fn md_fa_lenient(detected: &[bool], truth: &[bool]) -> Result<(Option<f64>, Option<f64>)> {
    check_lengths(detected, truth)?;
    let occupied = truth.iter().filter(|t| **t).count();
    let empty = truth.len() - occupied;
    let missed = detected.iter().zip(truth).filter(|(d, t)| **t && !**d).count();
    let false_alarms = detected.iter().zip(truth).filter(|(d, t)| !**t && **d).count();
    let md = (occupied > 0).then(|| missed as f64 / occupied as f64);
    let fa = (empty > 0).then(|| false_alarms as f64 / empty as f64);
    Ok((md, fa))
}

/// `10 log10(|x_hat - x|^2 / |x|^2)`; `-inf` for an exact match, `NaN` for zero truth.
pub fn nmse_db(x_hat: &[f64], x: &[f64]) -> Result<f64> {
    if x_hat.len() != x.len() {
        return Err(Error::DimMismatch(format!("{} estimates for {} truth values", x_hat.len(), x.len())));
    }
    let err: f64 = x_hat.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
    let norm: f64 = x.iter().map(|v| v * v).sum();
    if norm == 0.0 {
        return Ok(f64::NAN);
    }
    if err == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * (err / norm).log10())
}

/// Contents of `metrics.json`. Undefined values serialize as `null` and are
/// explained in `flags`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub md: Option<f64>,
    pub fa: Option<f64>,
    pub nmse_db: Option<f64>,
    pub threshold: f64,
    pub n_occupied: usize,
    pub n_empty: usize,
    pub flags: Vec<String>,
}

/// Normalizes, thresholds and scores an estimate.
pub fn score(x_hat: &[f64], x_true: &[f64], truth: &[bool], threshold: f64) -> Result<(MetricsReport, Vec<bool>)> {
    let norm = normalize(x_hat);
    let detected = detect(&norm.values, threshold);
    let (md, fa) = md_fa_lenient(&detected, truth)?;
    let mut flags = Vec::new();
    if norm.all_zero {
        flags.push(FLAG_ALL_ZERO.to_string());
    }
    if md.is_none() {
        flags.push(FLAG_NO_OCCUPIED.to_string());
    }
    if fa.is_none() {
        flags.push(FLAG_NO_EMPTY.to_string());
    }
    let nmse = nmse_db(x_hat, x_true)?;
    let nmse = if nmse.is_nan() {
        flags.push(FLAG_NMSE_ZERO_TRUTH.to_string());
        None
    } else if nmse == f64::NEG_INFINITY {
        flags.push(FLAG_NMSE_EXACT.to_string());
        None
    } else {
        Some(nmse)
    };
    let n_occupied = truth.iter().filter(|t| **t).count();
    let report = MetricsReport {
        md,
        fa,
        nmse_db: nmse,
        threshold,
        n_occupied,
        n_empty: truth.len() - n_occupied,
        flags,
    };
    Ok((report, detected))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        let z = normalize(&[0.0, 0.0]);
        assert!(z.all_zero);
        assert_eq!(z.values, vec![0.0, 0.0]);
        let residue = normalize(&[1e-20, 0.0]);
        assert!(residue.all_zero);
        assert_eq!(residue.values, vec![1e-20, 0.0]);
        let n = normalize(&[0.1, 0.5, 0.25]);
        assert_eq!(n.values, vec![0.2, 1.0, 0.5]);
        assert_eq!(normalize(&n.values).values, n.values);
    }

    #[test]
    fn detect_boundary_inclusive() {
        assert_eq!(detect(&[0.5, 0.49, 1.0], 0.5), vec![true, false, true]);
        assert_eq!(detect(&[0.0, 0.0], 0.5), vec![false, false]);
        assert_eq!(detect(&[0.0, 0.3], 0.0), vec![true, true]);
    }

    #[test]
    fn md_fa_examples() {
        let truth = [true, false, true, false];
        assert_eq!(md_fa(&truth, &truth).unwrap(), (0.0, 0.0));
        assert_eq!(md_fa(&[true; 4], &truth).unwrap(), (0.0, 1.0));
        let comp: Vec<bool> = truth.iter().map(|t| !t).collect();
        assert_eq!(md_fa(&comp, &truth).unwrap(), (1.0, 1.0));
        assert!(matches!(md_fa(&[true, false], &[false, false]), Err(Error::DegenerateTruth(_))));
    }

    #[test]
    fn nmse_examples() {
        let x = [0.0, 1.0, 0.5];
        assert_eq!(nmse_db(&x, &x).unwrap(), f64::NEG_INFINITY);
        assert!(nmse_db(&[0.0; 3], &x).unwrap().abs() < 1e-12);
        let twice: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        assert!(nmse_db(&twice, &x).unwrap().abs() < 1e-12);
    }

    #[test]
    fn report_serializes_nulls() {
        let (r, _) = score(&[0.0, 1.0], &[0.0, 1.0], &[false, true], 0.5).unwrap();
        assert_eq!(r.nmse_db, None);
        assert!(r.flags.contains(&FLAG_NMSE_EXACT.to_string()));
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["nmse_db"].is_null());
        assert_eq!(json["md"], 0.0);
    }
}
