use serde::{Deserialize, Serialize};

use super::prior::{g_in, Denoiser, PriorParams, VARIANCE_FLOOR};
use super::{RMatrix, RVector};
use crate::error::{Error, Result};

pub const DEFAULT_DAMPING: f64 = 0.7;
const DIVERGENCE_LIMIT: f64 = 1e30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GampConfig {
    /// Per-component measurement noise variance.
    pub sigma_w: f64,
    pub max_iters: usize,
    /// Stop once `sum |h - z| <= tolerance`.
    pub tolerance: f64,
    pub denoiser: Denoiser,
    pub damping: f64,
}

impl Default for GampConfig {
    fn default() -> Self {
        Self { sigma_w: 0.0, max_iters: 200, tolerance: 1e-6, denoiser: Denoiser::SumProduct, damping: DEFAULT_DAMPING }
    }
}

impl GampConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_w >= 0.0 && self.sigma_w.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma_w must be finite and >= 0, got {}", self.sigma_w)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidArgument(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        Ok(())
    }
}

/// Iterates of the message-passing loop.
#[derive(Debug, Clone, PartialEq)]
pub struct GampState {
    pub x: RVector,
    pub var_x: RVector,
    pub s: RVector,
    pub var_s: RVector,
    pub z: RVector,
    pub var_z: RVector,
    pub q: RVector,
    pub u: RVector,
    pub var_u: RVector,
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GampDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub tolerance: f64,
    pub sigma_w: f64,
    pub denoiser: Denoiser,
    pub damping: f64,
    pub residual_trace: Vec<f64>,
    /// Filled in by callers that know the ground truth.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmse_db: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct GampOutput {
    /// Final estimate clipped to `[0, 1]`.
    pub x: Vec<f64>,
    pub diagnostics: GampDiagnostics,
    pub state: GampState,
}

fn check_finite(v: &RVector, iteration: usize) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericalDivergence { iteration })
    }
}

fn check_variance(v: &RVector, iteration: usize) -> Result<()> {
    if v.iter().all(|x| x.is_finite() && *x <= DIVERGENCE_LIMIT) {
        Ok(())
    } else {
        Err(Error::NumericalDivergence { iteration })
    }
}

/// Damped GAMP with a separable prior and an AWGN output channel.
pub fn run_gamp(a: &RMatrix, h: &RVector, prior: &PriorParams, cfg: &GampConfig) -> Result<GampOutput> {
    prior.validate()?;
    cfg.validate()?;
    let (m, n) = a.shape();
    if h.len() != m {
        return Err(Error::DimMismatch(format!("matrix has {m} rows, measurement has {}", h.len())));
    }
    let a2 = a.map(|v| v * v);
    let beta = cfg.damping;
    let (mean0, var0) = prior.moments();

    let mut st = GampState {
        x: RVector::from_element(n, mean0),
        var_x: RVector::from_element(n, var0),
        s: RVector::zeros(m),
        var_s: RVector::zeros(m),
        z: RVector::zeros(m),
        var_z: RVector::zeros(m),
        q: RVector::zeros(m),
        u: RVector::zeros(n),
        var_u: RVector::zeros(n),
        iteration: 0,
    };
    let mut trace = Vec::new();
    let mut residual;
    let mut converged = false;
    let mut ats = RVector::zeros(n);
    let mut a2ts = RVector::zeros(n);

    loop {
        // Output linear step.
        st.z.gemv(1.0, a, &st.x, 0.0);
        st.var_z.gemv(1.0, &a2, &st.var_x, 0.0);
        check_variance(&st.var_z, st.iteration)?;
        residual = h.iter().zip(st.z.iter()).map(|(h, z)| (h - z).abs()).sum::<f64>();
        trace.push(residual);
        if residual <= cfg.tolerance {
            converged = true;
            break;
        }
        if st.iteration >= cfg.max_iters {
            break;
        }

        // Output nonlinear step.
        for i in 0..m {
            st.q[i] = st.z[i] - st.var_z[i] * st.s[i];
            let d = cfg.sigma_w + st.var_z[i];
            if !(d > 0.0) {
                return Err(Error::ZeroVariance);
            }
            let s_new = (h[i] - st.q[i]) / d;
            if st.iteration == 0 {
                st.s[i] = s_new;
                st.var_s[i] = 1.0 / d;
            } else {
                st.s[i] = beta * s_new + (1.0 - beta) * st.s[i];
                st.var_s[i] = beta / d + (1.0 - beta) * st.var_s[i];
            }
        }
        check_finite(&st.s, st.iteration)?;

        // Input linear step.
        ats.gemv_tr(1.0, a, &st.s, 0.0);
        a2ts.gemv_tr(1.0, &a2, &st.var_s, 0.0);
        for j in 0..n {
            if a2ts[j] > 0.0 {
                st.var_u[j] = (1.0 / a2ts[j]).max(VARIANCE_FLOOR);
                st.u[j] = st.x[j] + st.var_u[j] * ats[j];
            } else {
                // Column never observed: the prior alone decides.
                st.var_u[j] = DIVERGENCE_LIMIT;
                st.u[j] = st.x[j];
            }
        }

        // Input nonlinear step.
        for j in 0..n {
            let est = g_in(st.u[j], st.var_u[j], prior, cfg.denoiser)?;
            st.x[j] = beta * est.mean + (1.0 - beta) * st.x[j];
            st.var_x[j] = (beta * est.var + (1.0 - beta) * st.var_x[j]).max(VARIANCE_FLOOR);
        }
        st.iteration += 1;
        check_finite(&st.x, st.iteration)?;
        check_variance(&st.var_x, st.iteration)?;
    }

    let x = st.x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let diagnostics = GampDiagnostics {
        iterations: st.iteration,
        converged,
        final_residual: residual,
        tolerance: cfg.tolerance,
        sigma_w: cfg.sigma_w,
        denoiser: cfg.denoiser,
        damping: cfg.damping,
        residual_trace: trace,
        nmse_db: None,
    };
    Ok(GampOutput { x, diagnostics, state: st })
}
