//! Shared numerical kernels: sign bisection, central differences with
//! Richardson extrapolation, adaptive Simpson quadrature and two-parameter
//! affine least squares.
//!
//! Tolerances are absolute on arguments and relative on values unless a
//! kernel says otherwise.

use std::cmp::Ordering;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("bisection hit the iteration cap ({0} iterations)")]
    IterationCap(usize),
    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("adaptive quadrature exceeded the subdivision cap on [{lo}, {hi}]")]
    SubdivisionCap { lo: f64, hi: f64 },
    #[error("degenerate least-squares problem: {0}")]
    Degenerate(&'static str),
    #[error("non-finite value encountered at {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionConfig {
    pub tol_abs: f64,
    pub max_iter: usize,
}

impl BisectionConfig {
    pub fn new(tol_abs: f64) -> Self {
        assert!(tol_abs > 0.0, "bisection tolerance must be positive");
        Self {
            tol_abs,
            max_iter: 200,
        }
    }
}

impl Default for BisectionConfig {
    fn default() -> Self {
        Self::new(1e-12)
    }
}

/// Locates the sign change of a non-decreasing sign function on `[lo, hi]`.
///
/// `sign_fn` must report `Less` below the change point and `Greater` above it.
/// A point where it reports `Equal` is returned immediately. If the sign is
/// already `Greater` at `lo` the result is `lo`, and symmetrically `hi` when
/// the sign is `Less` everywhere.
pub fn bisect<F>(sign_fn: F, lo: f64, hi: f64, cfg: &BisectionConfig) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> Ordering,
{
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(NumericsError::InvalidBracket { lo, hi });
    }
    if lo == hi {
        return Ok(lo);
    }
    match sign_fn(lo) {
        Ordering::Equal | Ordering::Greater => return Ok(lo),
        Ordering::Less => {}
    }
    match sign_fn(hi) {
        Ordering::Equal | Ordering::Less => return Ok(hi),
        Ordering::Greater => {}
    }

    let (mut a, mut b) = (lo, hi);
    for _ in 0..cfg.max_iter {
        let mid = a + 0.5 * (b - a);
        if b - a <= cfg.tol_abs || mid <= a || mid >= b {
            return Ok(mid);
        }
        match sign_fn(mid) {
            Ordering::Equal => return Ok(mid),
            Ordering::Less => a = mid,
            Ordering::Greater => b = mid,
        }
    }
    Err(NumericsError::IterationCap(cfg.max_iter))
}

/// Root of a continuous function on `[lo, hi]` by bisection on its values.
///
/// The endpoint values must not share a strict sign; orientation is read off
/// the endpoints, so increasing and decreasing functions are both accepted.
pub fn bisect_root<F>(f: F, lo: f64, hi: f64, cfg: &BisectionConfig) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    let (flo, fhi) = (f(lo), f(hi));
    if flo.is_nan() {
        return Err(NumericsError::NonFinite(lo));
    }
    if fhi.is_nan() {
        return Err(NumericsError::NonFinite(hi));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(NumericsError::InvalidBracket { lo, hi });
    }
    let orient = fhi.signum();
    let (mut a, mut b) = (lo, hi);
    for _ in 0..cfg.max_iter {
        let mid = a + 0.5 * (b - a);
        if b - a <= cfg.tol_abs || mid <= a || mid >= b {
            return Ok(mid);
        }
        let v = orient * f(mid);
        if v.is_nan() {
            return Err(NumericsError::NonFinite(mid));
        }
        if v == 0.0 {
            return Ok(mid);
        } else if v < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Err(NumericsError::IterationCap(cfg.max_iter))
}

/// Base step `cbrt(eps) * (1 + |x|)` for central differences.
pub fn default_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + x.abs())
}

/// Symmetric difference quotient `(fn(x+h) - fn(x-h)) / 2h`.
pub fn central_diff<F>(f: F, x: f64, h: f64) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    let d = (f(x + h) - f(x - h)) / (2.0 * h);
    if d.is_finite() {
        Ok(d)
    } else {
        Err(NumericsError::NonFinite(x))
    }
}

/// Richardson extrapolation of central differences over steps `h, h/2, ...`.
///
/// `levels` steps are combined, cancelling the error terms up to
/// `O(h^(2*levels))`. `levels == 1` is a plain central difference.
pub fn richardson<F>(f: F, x: f64, h: f64, levels: usize) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    let levels = levels.max(1);
    let mut prev: Vec<f64> = Vec::with_capacity(levels);
    let mut step = h;
    for k in 0..levels {
        let mut row = Vec::with_capacity(k + 1);
        row.push(central_diff(&f, x, step)?);
        let mut factor = 1.0;
        for m in 1..=k {
            factor *= 4.0;
            let better = row[m - 1] + (row[m - 1] - prev[m - 1]) / (factor - 1.0);
            row.push(better);
        }
        prev = row;
        step *= 0.5;
    }
    Ok(prev[levels - 1])
}

const SIMPSON_MAX_DEPTH: u32 = 50;

/// Adaptive Simpson quadrature of `fn` over `[lo, hi]` to absolute tolerance `tol`.
pub fn simpson_adaptive<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    if lo == hi {
        return Ok(0.0);
    }
    if hi < lo {
        return simpson_adaptive(f, hi, lo, tol).map(|v| -v);
    }
    let (fa, fb) = (f(lo), f(hi));
    let m = 0.5 * (lo + hi);
    let fm = f(m);
    let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    let v = simpson_step(&f, lo, hi, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumericsError::NonFinite(lo))
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || !delta.is_finite() {
        return Err(NumericsError::SubdivisionCap { lo: a, hi: b });
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineFit {
    pub slope: f64,
    pub intercept: f64,
    /// `max |v - fit(u)| / max |v|` over the input points.
    pub max_rel_residual: f64,
    /// Abscissa of the point attaining the maximal residual.
    pub worst_at: f64,
}

impl AffineFit {
    pub fn eval(&self, u: f64) -> f64 {
        self.slope * u + self.intercept
    }
}

/// Least-squares line through `(u, v)` points.
pub fn affine_lsq(points: &[(f64, f64)]) -> Result<AffineFit, NumericsError> {
    if points.len() < 2 {
        return Err(NumericsError::Degenerate("need at least two points"));
    }
    let n = points.len() as f64;
    let mean_u = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_v = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(u, v) in points {
        let du = u - mean_u;
        sxx += du * du;
        sxy += du * (v - mean_v);
    }
    if sxx == 0.0 {
        return Err(NumericsError::Degenerate("all abscissae are equal"));
    }
    let slope = sxy / sxx;
    let intercept = mean_v - slope * mean_u;

    let scale = points.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let mut worst = (0.0, points[0].0);
    for &(u, v) in points {
        let r = (v - (slope * u + intercept)).abs();
        if r > worst.0 {
            worst = (r, u);
        }
    }
    let max_rel_residual = if scale > 0.0 { worst.0 / scale } else { worst.0 };
    Ok(AffineFit {
        slope,
        intercept,
        max_rel_residual,
        worst_at: worst.1,
    })
}

/// Chebyshev nodes of the first kind on `[lo, hi]`, in increasing order.
pub fn chebyshev_nodes(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    (0..count)
        .rev()
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + 1) as f64 / (2 * count) as f64;
            mid + half * theta.cos()
        })
        .collect()
}
