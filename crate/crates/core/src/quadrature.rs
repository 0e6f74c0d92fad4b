//! Tensor-product quadrature over rectangles.
//!
//! All rules here are normalized to compute *means*: the weights of a rule sum to
//! one, so integrating over a rectangle and dividing by its area is a single step.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureRule {
    /// Tensor-product Gauss-Legendre.
    Gauss,
    /// Composite midpoint rule.
    Midpoint,
}

/// Quadrature settings. `tolerance: None` evaluates once with `points` per axis;
/// otherwise the point count doubles per axis until the relative change between
/// successive estimates drops below the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    #[serde(default = "default_rule")]
    pub rule: QuadratureRule,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_tolerance", rename = "tol")]
    pub tolerance: Option<f64>,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
}

fn default_rule() -> QuadratureRule {
    QuadratureRule::Gauss
}
fn default_points() -> usize {
    8
}
fn default_tolerance() -> Option<f64> {
    Some(1e-8)
}
fn default_max_points() -> usize {
    1024
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: default_rule(),
            points: default_points(),
            tolerance: default_tolerance(),
            max_points: default_max_points(),
        }
    }
}

impl QuadratureSpec {
    pub fn fixed(rule: QuadratureRule, points: usize) -> Self {
        Self { rule, points, tolerance: None, max_points: points.max(1) }
    }

    pub fn auto(tolerance: f64) -> Self {
        Self { tolerance: Some(tolerance), ..Self::default() }
    }

    /// Same rule, tolerance scaled by `factor` (used for nested inner integrals).
    pub fn tightened(&self, factor: f64) -> Self {
        Self { tolerance: self.tolerance.map(|t| t * factor), ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::InvalidArgument("quadrature needs at least one point per axis".into()));
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0) {
                return Err(Error::InvalidArgument(format!("quadrature tolerance must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

/// One-dimensional rule on `[-1, 1]` with weights summing to one.
#[derive(Debug, Clone)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn compute_gauss_legendre(n: usize) -> Rule1d {
    if n == 1 {
        return Rule1d { nodes: vec![0.0], weights: vec![1.0] };
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess for the i-th largest root.
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 1.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule1d { nodes, weights }
}

/// Gauss-Legendre rule with `n` nodes (memoized).
pub fn gauss_legendre(n: usize) -> Arc<Rule1d> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule1d>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(compute_gauss_legendre(n.max(1)));
    cache.lock().expect("rule cache poisoned").insert(n, rule.clone());
    rule
}

pub fn midpoint(n: usize) -> Arc<Rule1d> {
    let n = n.max(1);
    let w = 1.0 / n as f64;
    Arc::new(Rule1d {
        nodes: (0..n).map(|i| -1.0 + (2.0 * i as f64 + 1.0) * w).collect(),
        weights: vec![w; n],
    })
}

pub fn rule_1d(rule: QuadratureRule, n: usize) -> Arc<Rule1d> {
    match rule {
        QuadratureRule::Gauss => gauss_legendre(n),
        QuadratureRule::Midpoint => midpoint(n),
    }
}

/// Mean of `f` over `[a, b]` with a fixed rule.
pub fn interval_mean(rule: &Rule1d, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    rule.nodes.iter().zip(&rule.weights).map(|(t, w)| w * f(mid + half * t)).sum()
}

/// Values that can be averaged by the rectangle integrators.
pub trait QuadValue: Copy + Send + Sync {
    fn zero() -> Self;
    fn add_scaled(&mut self, other: Self, weight: f64);
    fn magnitude(&self) -> f64;
    fn difference(&self, other: &Self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add_scaled(&mut self, other: Self, weight: f64) {
        *self += weight * other;
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn difference(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, other: Self, weight: f64) {
        self.re += weight * other.re;
        self.im += weight * other.im;
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn difference(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

/// Estimate of a vector of rectangle means plus bookkeeping.
#[derive(Debug, Clone)]
pub struct RectMean<T> {
    pub values: Vec<T>,
    /// Mean of `|f|` per component on the final rule (the integrand's scale).
    pub scale: Vec<f64>,
    pub points_per_axis: usize,
}

fn rect_mean_fixed<T: QuadValue>(
    rect: &Rect,
    rule: &Rule1d,
    width: usize,
    f: &mut impl FnMut(Point2, &mut [T]),
) -> RectMean<T> {
    let mut values = vec![T::zero(); width];
    let mut scale = vec![0.0; width];
    let mut buf = vec![T::zero(); width];
    let hx = 0.5 * rect.length;
    let hy = 0.5 * rect.width;
    for (ty, wy) in rule.nodes.iter().zip(&rule.weights) {
        let y = rect.center.y + hy * ty;
        for (tx, wx) in rule.nodes.iter().zip(&rule.weights) {
            let w = wx * wy;
            f(Point2::new(rect.center.x + hx * tx, y), &mut buf);
            for ((v, s), b) in values.iter_mut().zip(scale.iter_mut()).zip(&buf) {
                v.add_scaled(*b, w);
                *s += w * b.magnitude();
            }
        }
    }
    RectMean { values, scale, points_per_axis: rule.nodes.len() }
}

/// Relative floor used when a mean nearly cancels: changes are measured against
/// `max(|mean|, CANCELLATION_FLOOR * mean|f|)`.
pub const CANCELLATION_FLOOR: f64 = 1e-6;

/// Means of a vector-valued integrand over a rectangle.
///
/// `f` writes `width` samples at each node. With auto refinement every component
/// must satisfy the tolerance.
pub fn rect_mean_multi<T: QuadValue>(
    rect: &Rect,
    spec: &QuadratureSpec,
    width: usize,
    mut f: impl FnMut(Point2, &mut [T]),
) -> Result<RectMean<T>> {
    spec.validate()?;
    let mut n = spec.points;
    let mut current = rect_mean_fixed(rect, &rule_1d(spec.rule, n), width, &mut f);
    let Some(tol) = spec.tolerance else {
        return Ok(current);
    };
    loop {
        let next_n = n * 2;
        if next_n > spec.max_points {
            let change = max_relative_change(&current, None);
            return Err(Error::QuadratureNotConverged { points: n, change });
        }
        let next = rect_mean_fixed(rect, &rule_1d(spec.rule, next_n), width, &mut f);
        let change = max_relative_change(&next, Some(&current));
        current = next;
        n = next_n;
        if change < tol {
            return Ok(current);
        }
    }
}

fn max_relative_change<T: QuadValue>(next: &RectMean<T>, prev: Option<&RectMean<T>>) -> f64 {
    let Some(prev) = prev else {
        return f64::INFINITY;
    };
    next.values
        .iter()
        .zip(&prev.values)
        .zip(&next.scale)
        .map(|((a, b), s)| {
            let denom = a.magnitude().max(CANCELLATION_FLOOR * s).max(f64::MIN_POSITIVE);
            a.difference(b) / denom
        })
        .fold(0.0, f64::max)
}

/// Mean of a scalar integrand over a rectangle.
pub fn rect_mean<T: QuadValue>(rect: &Rect, spec: &QuadratureSpec, mut f: impl FnMut(Point2) -> T) -> Result<T> {
    let r = rect_mean_multi(rect, spec, 1, |p, out: &mut [T]| out[0] = f(p))?;
    Ok(r.values[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_weights_sum_to_one() {
        for n in [1, 2, 3, 7, 8, 64, 1024] {
            let r = gauss_legendre(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-13, "n={n} sum={s}");
        }
    }

    #[test]
    fn gauss_is_exact_for_polynomials() {
        // mean of x^k over [-1,1] is 1/(k+1) for even k.
        let r = gauss_legendre(6);
        for k in (0..=10).step_by(2) {
            let m: f64 = interval_mean(&r, -1.0, 1.0, |x| x.powi(k as i32));
            assert!((m - 1.0 / (k as f64 + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn auto_refinement_on_smooth_function() {
        let rect = Rect::new(Point2::new(1.0, 2.0), 2.0, 1.0);
        // mean of x*y over [0,2]x[1.5,2.5] = 1 * 2
        let m: f64 = rect_mean(&rect, &QuadratureSpec::default(), |p| p.x * p.y).unwrap();
        assert!((m - 2.0).abs() < 1e-13);
    }

    #[test]
    fn non_convergence_is_reported() {
        let rect = Rect::new(Point2::new(0.0, 0.0), 1.0, 1.0);
        let spec = QuadratureSpec { max_points: 16, tolerance: Some(1e-14), ..QuadratureSpec::default() };
        let err = rect_mean(&rect, &spec, |p| (400.0 * p.x).sin() + (p.y * 300.0).cos()).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }
}
