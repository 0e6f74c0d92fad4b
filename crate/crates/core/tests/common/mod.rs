//! Reference implementations used as test oracles. None of these share code
//! with the library's quadrature.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pixel_isac::{Point2, Rect};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Free-space gain written out from scratch.
pub fn gain(antenna: Point2, p: Point2, wavelength: f64) -> Complex64 {
    let d = ((antenna.x - p.x).powi(2) + (antenna.y - p.y).powi(2)).sqrt();
    let phase = -TAU * d / wavelength;
    Complex64::new(phase.cos(), phase.sin()) * (wavelength / (4.0 * PI * d))
}

/// Monte Carlo mean over a rectangle. Returns the mean and the standard
/// error of the complex mean, sqrt(E|g - mean|^2 / n).
pub fn mc_mean_complex(rect: &Rect, n: usize, seed: u64, f: impl Fn(Point2) -> Complex64) -> (Complex64, f64) {
    let mut r = rng(seed);
    let (x0, y0) = (rect.x_min(), rect.y_min());
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let p = Point2::new(x0 + r.random::<f64>() * rect.length, y0 + r.random::<f64>() * rect.width);
        let v = f(p);
        sum += v;
        sum_sq += v.norm_sqr();
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean.norm_sqr()).max(0.0) * nf / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

pub fn mc_mean_real(rect: &Rect, n: usize, seed: u64, f: impl Fn(Point2) -> f64) -> (f64, f64) {
    let (m, se) = mc_mean_complex(rect, n, seed, |p| Complex64::new(f(p), 0.0));
    (m.re, se)
}

fn midpoint_mean(rect: &Rect, n: usize, f: &impl Fn(Point2) -> Complex64) -> Complex64 {
    let hx = rect.length / n as f64;
    let hy = rect.width / n as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let x = rect.x_min() + (i as f64 + 0.5) * hx;
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..n {
            row += f(Point2::new(x, rect.y_min() + (j as f64 + 0.5) * hy));
        }
        sum += row;
    }
    sum / (n * n) as f64
}

/// Two-level Richardson extrapolation of the composite midpoint rule
/// (error terms h^2 and h^4 removed). The base resolution doubles until two
/// successive extrapolants agree to `rel` of their magnitude or of `scale`.
pub fn richardson_mean(rect: &Rect, n0: usize, rel: f64, scale: f64, f: impl Fn(Point2) -> Complex64) -> Complex64 {
    let extrapolate = |n: usize| {
        let m1 = midpoint_mean(rect, n, &f);
        let m2 = midpoint_mean(rect, 2 * n, &f);
        let m4 = midpoint_mean(rect, 4 * n, &f);
        let r1 = (m2 * 4.0 - m1) / 3.0;
        let r2 = (m4 * 4.0 - m2) / 3.0;
        (r2 * 16.0 - r1) / 15.0
    };
    let mut n = n0.max(2);
    let mut prev = extrapolate(n);
    loop {
        n *= 2;
        let next = extrapolate(n);
        if (next - prev).norm() <= rel * next.norm().max(scale) || n >= 4096 {
            return next;
        }
        prev = next;
    }
}

/// Integral of sqrt(x^2 + y^2) over [x1,x2]x[y1,y2] in closed form.
pub fn radial_integral(x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
    // ln(b + sqrt(a^2 + b^2)), rewritten for b < 0 to avoid cancellation.
    fn log_term(a: f64, b: f64) -> f64 {
        let r = a.hypot(b);
        if b >= 0.0 {
            (b + r).ln()
        } else {
            (a * a / (r - b)).ln()
        }
    }
    let antiderivative = |x: f64, y: f64| {
        let r = x.hypot(y);
        let mut v = x * y * r / 3.0;
        if x != 0.0 {
            v += x.powi(3) * log_term(x, y) / 6.0;
        }
        if y != 0.0 {
            v += y.powi(3) * log_term(y, x) / 6.0;
        }
        v
    };
    antiderivative(x2, y2) - antiderivative(x1, y2) - antiderivative(x2, y1) + antiderivative(x1, y1)
}

/// Mean distance from `antenna` to a rectangle, from the closed form.
pub fn mean_distance_exact(antenna: Point2, rect: &Rect) -> f64 {
    let x1 = rect.x_min() - antenna.x;
    let x2 = rect.x_max() - antenna.x;
    let y1 = rect.y_min() - antenna.y;
    let y2 = rect.y_max() - antenna.y;
    radial_integral(x1, x2, y1, y2) / rect.area()
}

/// Brute-force sparsest nonnegative solution of `a x = h` with at most
/// `max_support` nonzeros. Returns the support, smallest first; ties
/// are broken by residual.
pub fn l0_support(a: &DMatrix<f64>, h: &DVector<f64>, max_support: usize, rel_tol: f64) -> Option<Vec<usize>> {
    let n = a.ncols();
    let h_norm = h.norm();
    if h_norm == 0.0 {
        return Some(Vec::new());
    }
    for k in 1..=max_support {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for support in combinations(n, k) {
            let sub = DMatrix::from_fn(a.nrows(), k, |i, j| a[(i, support[j])]);
            let Some(coef) = sub.clone().svd(true, true).solve(h, 1e-12).ok() else { continue };
            if coef.iter().any(|c| *c <= 0.0) {
                continue;
            }
            let res = (&sub * &coef - h).norm() / h_norm;
            if res <= rel_tol && best.as_ref().is_none_or(|(r, _)| res < *r) {
                best = Some((res, support));
            }
        }
        if let Some((_, s)) = best {
            return Some(s);
        }
    }
    None
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Matrix with orthonormal columns from Gram-Schmidt on Gaussian draws.
pub fn orthonormal_columns(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    assert!(m >= n);
    let mut r = rng(seed);
    let mut q = DMatrix::<f64>::zeros(m, n);
    for j in 0..n {
        let mut v = DVector::from_fn(m, |_, _| gaussian(&mut r));
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for k in 0..j {
                let proj = q.column(k).dot(&v);
                v -= q.column(k) * proj;
            }
        }
        let norm = v.norm();
        q.set_column(j, &(v / norm));
    }
    q
}

pub fn gaussian(r: &mut impl Rng) -> f64 {
    // Box-Muller; keeps the oracle free of the library's sampling path.
    let u1: f64 = 1.0 - r.random::<f64>();
    let u2: f64 = r.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Random sparse vector on [lo, 1] with exactly `k` nonzeros.
pub fn sparse_vector(n: usize, k: usize, lo: f64, r: &mut impl Rng) -> Vec<f64> {
    let mut x = vec![0.0; n];
    let mut placed = 0;
    while placed < k {
        let j = r.random_range(0..n);
        if x[j] == 0.0 {
            x[j] = lo + (1.0 - lo) * r.random::<f64>();
            placed += 1;
        }
    }
    x
}
