//! Truncated spike-and-slab prior on `[0, 1]` and the matching input denoisers.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
/// Floor applied to posterior variances.
pub const VARIANCE_FLOOR: f64 = 1e-30;
/// Relative width of the Gaussian standing in for the Dirac spike in max-sum mode.
pub const SPIKE_WIDTH: f64 = 1e-3;

/// `p(x) = (1 - alpha + lambda) delta(x) + alpha N(x | theta, sigma^2) 1[0,1](x)`,
/// where `lambda` is the slab mass that falls outside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorParams {
    pub alpha: f64,
    pub theta: f64,
    pub sigma: f64,
}

impl PriorParams {
    pub fn new(alpha: f64, theta: f64, sigma: f64) -> Result<Self> {
        let p = Self { alpha, theta, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidArgument(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {}", self.sigma)));
        }
        let spike = self.spike_mass();
        if !(spike > 0.0 && spike < 1.0) {
            return Err(Error::InvalidArgument(format!("spike mass {spike} outside (0, 1)")));
        }
        Ok(())
    }

    /// Slab mass outside `[0, 1]`.
    pub fn truncation_mass(&self) -> f64 {
        let below = norm_cdf(-self.theta / self.sigma);
        let above = norm_sf((1.0 - self.theta) / self.sigma);
        self.alpha * (below + above)
    }

    /// Weight of the point mass at zero.
    pub fn spike_mass(&self) -> f64 {
        1.0 - self.alpha + self.truncation_mass()
    }

    /// Mean and variance of the prior itself.
    pub fn moments(&self) -> (f64, f64) {
        let a = -self.theta / self.sigma;
        let b = (1.0 - self.theta) / self.sigma;
        let t = truncated_normal(self.theta, self.sigma, a, b);
        let slab = self.alpha * t.log_z.exp();
        let mean = slab * t.mean;
        let second = slab * (t.var + t.mean * t.mean);
        (mean, (second - mean * mean).max(VARIANCE_FLOOR))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Denoiser {
    /// Posterior mean and variance.
    #[default]
    SumProduct,
    /// Posterior mode with the spike replaced by a narrow Gaussian.
    MaxSum,
}

impl Denoiser {
    pub fn as_str(&self) -> &'static str {
        match self {
            Denoiser::SumProduct => "sum-product",
            Denoiser::MaxSum => "max-sum",
        }
    }
}

/// Denoiser output: estimate and its variance (`sigma_u * g_in'`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputEstimate {
    pub mean: f64,
    pub var: f64,
}

/// Input function for a scalar observation `u = x + N(0, v)`.
pub fn g_in(u: f64, v: f64, p: &PriorParams, denoiser: Denoiser) -> Result<InputEstimate> {
    if !(v >= VARIANCE_FLOOR) {
        return Err(Error::DegenerateVariance(v));
    }
    match denoiser {
        Denoiser::SumProduct => Ok(sum_product(u, v, p)),
        Denoiser::MaxSum => Ok(max_sum(u, v, p)),
    }
}

fn sum_product(u: f64, v: f64, p: &PriorParams) -> InputEstimate {
    let s2 = p.sigma * p.sigma;
    let tau = 1.0 / (1.0 / s2 + 1.0 / v);
    let m = tau * (p.theta / s2 + u / v);
    let sd = tau.sqrt();
    let t = truncated_normal(m, sd, -m / sd, (1.0 - m) / sd);

    let log_slab = p.alpha.ln() + log_normal_pdf(u, p.theta, s2 + v) + t.log_z;
    let log_spike = p.spike_mass().ln() + log_normal_pdf(u, 0.0, v);
    let pi = sigmoid(log_slab - log_spike);

    let mean = (pi * t.mean).clamp(0.0, 1.0);
    let var = pi * t.var + pi * (1.0 - pi) * t.mean * t.mean;
    InputEstimate { mean, var: var.max(VARIANCE_FLOOR) }
}

fn max_sum(u: f64, v: f64, p: &PriorParams) -> InputEstimate {
    let s2 = p.sigma * p.sigma;
    let e2 = (SPIKE_WIDTH * p.sigma).powi(2);

    let tau0 = 1.0 / (1.0 / e2 + 1.0 / v);
    let m0 = (tau0 * u / v).clamp(0.0, 1.0);
    let f_spike = p.spike_mass().ln() + log_normal_pdf(m0, 0.0, e2) + log_normal_pdf(m0, u, v);

    let tau = 1.0 / (1.0 / s2 + 1.0 / v);
    let m = (tau * (p.theta / s2 + u / v)).clamp(0.0, 1.0);
    let f_slab = p.alpha.ln() + log_normal_pdf(m, p.theta, s2) + log_normal_pdf(m, u, v);

    if f_slab > f_spike {
        InputEstimate { mean: m, var: tau.max(VARIANCE_FLOOR) }
    } else {
        InputEstimate { mean: m0, var: tau0.max(VARIANCE_FLOOR) }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn log_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (x - mean).powi(2) / var - 0.5 * var.ln() - LN_SQRT_2PI
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Upper tail `Q(x) = 1 - Phi(x)`.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

const TAIL_SWITCH: f64 = 30.0;

fn log_sf(x: f64) -> f64 {
    if x < TAIL_SWITCH {
        norm_sf(x).ln()
    } else {
        let x2 = x * x;
        -0.5 * x2 - x.ln() - LN_SQRT_2PI + (1.0 - 1.0 / x2 + 3.0 / (x2 * x2)).ln()
    }
}

/// Inverse Mills ratio `phi(x) / Q(x)`.
fn inv_mills(x: f64) -> f64 {
    if x < TAIL_SWITCH {
        norm_pdf(x) / norm_sf(x)
    } else {
        let x2 = x * x;
        x + 1.0 / x - 2.0 / (x2 * x) + 10.0 / (x2 * x2 * x)
    }
}

/// Moments of `N(m, sd^2)` restricted to standardized bounds `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncated {
    /// Log of the retained probability mass.
    pub log_z: f64,
    pub mean: f64,
    pub var: f64,
}

pub fn truncated_normal(m: f64, sd: f64, a: f64, b: f64) -> Truncated {
    let (log_z, r1, r2) = standard_ratios(a, b);
    let mean = m + sd * r1;
    let var = sd * sd * (1.0 + r2 - r1 * r1);
    let lo = m + sd * a;
    let hi = m + sd * b;
    Truncated { log_z, mean: mean.clamp(lo, hi), var: var.max(0.0) }
}

/// `(ln Z, (phi(a) - phi(b)) / Z, (a phi(a) - b phi(b)) / Z)` for `Z = Phi(b) - Phi(a)`.
fn standard_ratios(a: f64, b: f64) -> (f64, f64, f64) {
    if a >= 0.0 {
        // Both bounds in the upper tail: express through Q(a) to avoid cancellation.
        let log_qa = log_sf(a);
        let r = if b.is_infinite() { 0.0 } else { (log_sf(b) - log_qa).exp() };
        let one_minus = if b.is_infinite() { 1.0 } else { -(log_sf(b) - log_qa).exp_m1() };
        let ha = inv_mills(a);
        let (hb, bhb) = if b.is_infinite() { (0.0, 0.0) } else { (inv_mills(b), b * inv_mills(b)) };
        let r1 = (ha - r * hb) / one_minus;
        let r2 = (a * ha - r * bhb) / one_minus;
        (log_qa + one_minus.ln(), r1, r2)
    } else if b <= 0.0 {
        let (lz, r1, r2) = standard_ratios(-b, -a);
        (lz, -r1, r2)
    } else {
        let z = (0.5 - norm_sf(b)) + (0.5 - norm_sf(-a));
        let (pa, pb) = (norm_pdf(a), norm_pdf(b));
        let apa = if a.is_infinite() { 0.0 } else { a * pa };
        let bpb = if b.is_infinite() { 0.0 } else { b * pb };
        (z.ln(), (pa - pb) / z, (apa - bpb) / z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_mass_matches_cdf() {
        let p = PriorParams::new(0.2, 0.5, 0.5).unwrap();
        let expected = 0.2 * 2.0 * norm_cdf(-1.0);
        assert!((p.truncation_mass() - expected).abs() < 1e-15);
    }

    #[test]
    fn truncated_moments_against_riemann_sum() {
        let (m, sd) = (0.3, 0.7);
        let n = 200_000;
        let (mut z, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let x = (i as f64 + 0.5) / n as f64;
            let w = norm_pdf((x - m) / sd) / sd / n as f64;
            z += w;
            s1 += w * x;
            s2 += w * x * x;
        }
        let t = truncated_normal(m, sd, -m / sd, (1.0 - m) / sd);
        let mean = s1 / z;
        assert!((t.log_z - z.ln()).abs() < 1e-9);
        assert!((t.mean - mean).abs() < 1e-9);
        assert!((t.var - (s2 / z - mean * mean)).abs() < 1e-9);
    }

    #[test]
    fn extreme_tails_stay_finite() {
        for (m, sd) in [(-50.0, 0.1), (51.0, 0.1), (-1e3, 1.0), (1e3, 1.0), (0.5, 1e-9)] {
            let t = truncated_normal(m, sd, -m / sd, (1.0 - m) / sd);
            assert!(t.mean.is_finite() && t.var.is_finite() && t.log_z.is_finite(), "{m} {sd} {t:?}");
            assert!((0.0..=1.0).contains(&t.mean));
        }
        let t = truncated_normal(-50.0, 0.1, 500.0, 510.0);
        assert!(t.mean.abs() < 1e-3, "{t:?}");
    }

    #[test]
    fn spike_dominates_negative_input() {
        let p = PriorParams::new(0.1, 0.5, 0.5).unwrap();
        for d in [Denoiser::SumProduct, Denoiser::MaxSum] {
            let e = g_in(-5.0, 1e-4, &p, d).unwrap();
            assert!(e.mean < 1e-9, "{d:?} {e:?}");
        }
    }

    #[test]
    fn collapsed_slab() {
        let p = PriorParams::new(0.999_999, 0.5, 1e-3).unwrap();
        for u in [-3.0, 0.0, 0.5, 2.0] {
            let e = g_in(u, 1.0, &p, Denoiser::SumProduct).unwrap();
            assert!((e.mean - 0.5).abs() < 1e-3, "u={u} {e:?}");
        }
    }

    #[test]
    fn degenerate_variance() {
        let p = PriorParams::new(0.1, 0.5, 0.5).unwrap();
        assert!(matches!(g_in(0.0, 0.0, &p, Denoiser::SumProduct), Err(Error::DegenerateVariance(_))));
    }

    #[test]
    fn invalid_prior() {
        assert!(PriorParams::new(0.0, 0.5, 0.5).is_err());
        assert!(PriorParams::new(0.5, 1.5, 0.5).is_err());
        assert!(PriorParams::new(0.5, 0.5, 0.0).is_err());
    }
}
