//! Phase error caused by describing a pixel with one antenna distance.
//!
//! Every error is `(2 pi / lambda)` times the pixel mean of `|D - ref|`, where `D`
//! is either the distance to a point (`d`) or the mean distance over a target
//! rectangle centered at that point (`d_t`), and `ref` is the pixel-center
//! distance `d_0` (conventional) or the pixel-mean distance `d_p` (proposed).
//!
//! The absolute value has a kink along the level curve `D = ref`. Both integrands
//! are convex in each coordinate, so the kink is located by root finding and the
//! quadrature is split there.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};
use crate::quadrature::{rect_mean, rule_1d, QuadratureSpec, Rule1d};

/// Inner (target-mean) integrals use a tolerance this many times tighter.
pub const INNER_TIGHTENING: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorConfig {
    pub antenna: Point2,
    pub pixel: Rect,
    pub target_length: f64,
    pub target_width: f64,
    pub wavelength: f64,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

impl ErrorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pixel.contains_closed(&self.antenna) {
            return Err(Error::AntennaInsidePixel { x: self.antenna.x, y: self.antenna.y });
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::InvalidArgument(format!("wavelength must be positive, got {}", self.wavelength)));
        }
        if !(self.pixel.length >= 0.0 && self.pixel.width >= 0.0) {
            return Err(Error::InvalidArgument("pixel dimensions must be non-negative".into()));
        }
        if !(self.target_length >= 0.0 && self.target_width >= 0.0) {
            return Err(Error::InvalidArgument("target dimensions must be non-negative".into()));
        }
        self.quadrature.validate()
    }

    pub fn inner_quadrature(&self) -> QuadratureSpec {
        self.quadrature.tightened(INNER_TIGHTENING)
    }

    /// Distance from the antenna to the pixel center.
    pub fn d0(&self) -> f64 {
        self.antenna.distance(&self.pixel.center)
    }

    fn target_at(&self, center: Point2) -> Rect {
        Rect::new(center, self.target_length, self.target_width)
    }

    pub fn with_wavelength(&self, wavelength: f64) -> Self {
        Self { wavelength, ..*self }
    }

    /// Target sized so that its area is `proportion` of the pixel area, same aspect.
    pub fn with_proportion(&self, proportion: f64) -> Self {
        let r = proportion.sqrt();
        Self { target_length: r * self.pixel.length, target_width: r * self.pixel.width, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub e1_conventional: f64,
    pub e1_proposed: f64,
    pub e2_conventional: f64,
    pub e2_proposed: f64,
    pub d0: f64,
    pub dp: f64,
}

/// Mean antenna distance over the pixel.
pub fn avg_pixel_distance(cfg: &ErrorConfig) -> Result<f64> {
    cfg.validate()?;
    rect_mean(&cfg.pixel, &cfg.inner_quadrature(), |p| cfg.antenna.distance(&p))
}

/// Mean antenna distance over a target rectangle centered at `center`.
pub fn planar_mean_distance(cfg: &ErrorConfig, center: Point2) -> Result<f64> {
    rect_mean(&cfg.target_at(center), &cfg.inner_quadrature(), |p| cfg.antenna.distance(&p))
}

pub fn point_error_conventional(cfg: &ErrorConfig) -> Result<f64> {
    cfg.validate()?;
    point_error(cfg, cfg.d0())
}

pub fn point_error_proposed(cfg: &ErrorConfig) -> Result<f64> {
    let dp = avg_pixel_distance(cfg)?;
    point_error(cfg, dp)
}

pub fn planar_error_conventional(cfg: &ErrorConfig) -> Result<f64> {
    cfg.validate()?;
    planar_error(cfg, cfg.d0())
}

pub fn planar_error_proposed(cfg: &ErrorConfig) -> Result<f64> {
    let dp = avg_pixel_distance(cfg)?;
    planar_error(cfg, dp)
}

fn point_error(cfg: &ErrorConfig, reference: f64) -> Result<f64> {
    let antenna = cfg.antenna;
    let mean = abs_deviation_mean(&cfg.pixel, antenna, &|p: Point2| Ok(antenna.distance(&p)), reference, &cfg.quadrature)?;
    Ok(TAU / cfg.wavelength * mean)
}

fn planar_error(cfg: &ErrorConfig, reference: f64) -> Result<f64> {
    let d_t = |p: Point2| planar_mean_distance(cfg, p);
    let mean = abs_deviation_mean(&cfg.pixel, cfg.antenna, &d_t, reference, &cfg.quadrature)?;
    Ok(TAU / cfg.wavelength * mean)
}

pub fn error_report(cfg: &ErrorConfig) -> Result<ErrorReport> {
    cfg.validate()?;
    let d0 = cfg.d0();
    let dp = avg_pixel_distance(cfg)?;
    Ok(ErrorReport {
        e1_conventional: point_error(cfg, d0)?,
        e1_proposed: point_error(cfg, dp)?,
        e2_conventional: planar_error(cfg, d0)?,
        e2_proposed: planar_error(cfg, dp)?,
        d0,
        dp,
    })
}

/// One line of `error_sweep.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub proportion: f64,
    pub e2_conventional: f64,
    pub e2_proposed: f64,
    pub lambda: f64,
    pub d0: f64,
    pub dp: f64,
}

pub const ERROR_SWEEP_HEADER: [&str; 6] = ["proportion", "e2_conventional", "e2_proposed", "lambda", "d0", "dp"];

/// `0.1, 0.2, ..., 1.0`.
pub fn default_proportions() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

/// Planar errors for targets covering each `proportion` of the pixel area.
pub fn sweep_proportion(cfg: &ErrorConfig, proportions: &[f64]) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if let Some(p) = proportions.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(Error::InvalidArgument(format!("proportion {p} outside (0, 1]")));
    }
    let d0 = cfg.d0();
    let dp = avg_pixel_distance(cfg)?;
    proportions
        .par_iter()
        .map(|&proportion| {
            let c = cfg.with_proportion(proportion);
            Ok(SweepRow {
                proportion,
                e2_conventional: planar_error(&c, d0)?,
                e2_proposed: planar_error(&c, dp)?,
                lambda: cfg.wavelength,
                d0,
                dp,
            })
        })
        .collect()
}

type Scalar<'a> = dyn Fn(Point2) -> Result<f64> + Sync + 'a;

/// Pixel mean of `|f - reference|` for `f` convex along both axes.
///
/// The inner axis is one the antenna lies outside of, where `f` is typically
/// monotone; roots along it split the inner integral, and the outer axis is split
/// wherever the root set changes shape (level curve meeting a pixel edge or
/// becoming tangent to an inner line).
fn abs_deviation_mean(rect: &Rect, antenna: Point2, f: &Scalar<'_>, reference: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let inner_is_x = antenna.x < rect.x_min() || antenna.x > rect.x_max();
    let (s_lo, s_hi, t_lo, t_hi) = if inner_is_x {
        (rect.y_min(), rect.y_max(), rect.x_min(), rect.x_max())
    } else {
        (rect.x_min(), rect.x_max(), rect.y_min(), rect.y_max())
    };
    let at = |s: f64, t: f64| if inner_is_x { Point2::new(t, s) } else { Point2::new(s, t) };
    let g = |s: f64, t: f64| -> Result<f64> { Ok(f(at(s, t))? - reference) };

    let mut breaks = vec![s_lo, s_hi];
    breaks.extend(convex_roots(s_lo, s_hi, &|s| g(s, t_lo))?);
    breaks.extend(convex_roots(s_lo, s_hi, &|s| g(s, t_hi))?);
    breaks.extend(convex_roots(s_lo, s_hi, &|s| Ok(golden_min(t_lo, t_hi, &|t| g(s, t))?.1))?);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (s_hi - s_lo).abs());

    let evaluate = |rule: &Rule1d| -> Result<f64> {
        piecewise_mean(&breaks, rule, &|s| {
            let mut inner = vec![t_lo, t_hi];
            inner.extend(convex_roots(t_lo, t_hi, &|t| g(s, t))?);
            inner.sort_by(f64::total_cmp);
            piecewise_mean(&inner, rule, &|t| Ok(g(s, t)?.abs()))
        })
    };

    let mut n = spec.points;
    let mut current = evaluate(&rule_1d(spec.rule, n))?;
    let Some(tol) = spec.tolerance else {
        return Ok(current);
    };
    let floor = 1e-14 * reference.abs();
    loop {
        let next_n = 2 * n;
        if next_n > spec.max_points {
            return Err(Error::QuadratureNotConverged { points: n, change: f64::NAN });
        }
        let next = evaluate(&rule_1d(spec.rule, next_n))?;
        let change = (next - current).abs() / next.abs().max(floor).max(f64::MIN_POSITIVE);
        current = next;
        n = next_n;
        if change < tol {
            return Ok(current);
        }
    }
}

/// Mean over `[breaks[0], breaks[last]]` applying `rule` on each sub-interval.
fn piecewise_mean(breaks: &[f64], rule: &Rule1d, f: &dyn Fn(f64) -> Result<f64>) -> Result<f64> {
    let lo = breaks[0];
    let hi = breaks[breaks.len() - 1];
    let total = hi - lo;
    if !(total > 0.0) {
        return f(lo);
    }
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut piece = 0.0;
        for (t, wt) in rule.nodes.iter().zip(&rule.weights) {
            piece += wt * f(mid + half * t)?;
        }
        acc += piece * (b - a) / total;
    }
    Ok(acc)
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Minimizer and minimum of a convex function on `[lo, hi]`.
fn golden_min(lo: f64, hi: f64, g: &dyn Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let (mut a, mut b) = (lo, hi);
    if !(b > a) {
        return Ok((a, g(a)?));
    }
    let width = b - a;
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut gc, mut gd) = (g(c)?, g(d)?);
    while b - a > 1e-13 * width {
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - GOLDEN * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + GOLDEN * (b - a);
            gd = g(d)?;
        }
    }
    let (ga, gb) = (g(lo)?, g(hi)?);
    let (mut best, mut val) = if gc <= gd { (c, gc) } else { (d, gd) };
    if ga < val {
        (best, val) = (lo, ga);
    }
    if gb < val {
        (best, val) = (hi, gb);
    }
    Ok((best, val))
}

/// Sign change of `g` inside `[a, b]` with `g(a)` and `g(b)` of opposite sign.
fn bisect(mut a: f64, mut b: f64, g: &dyn Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut ga = g(a)?;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m)?;
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Interior zeros (at most two) of a convex function on `[lo, hi]`.
fn convex_roots(lo: f64, hi: f64, g: &dyn Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    if !(hi > lo) {
        return Ok(Vec::new());
    }
    let (gl, gh) = (g(lo)?, g(hi)?);
    if (gl > 0.0) != (gh > 0.0) {
        return Ok(vec![bisect(lo, hi, g)?]);
    }
    if gl <= 0.0 {
        // Convexity keeps the function below the chord, so no sign change.
        return Ok(Vec::new());
    }
    let (tm, gm) = golden_min(lo, hi, g)?;
    if gm >= 0.0 {
        return Ok(Vec::new());
    }
    Ok(vec![bisect(lo, tm, g)?, bisect(tm, hi, g)?])
}
