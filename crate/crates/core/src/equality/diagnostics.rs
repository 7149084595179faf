//! Necessary conditions for equality, evaluated in reduced coordinates.

use rayon::prelude::*;

use super::grid::{local_radius, near_diagonal_tuples};
use super::reduce::{ReducedPoint, ReducedSystem};
use super::{DiagnosticResult, Worst, AFFINE_FIT_TOL, DERIVATIVE_TOL, EQUALITY_TOL, FIRST_ORDER_TOL};
use crate::error::{Error, Result};
use crate::numerics::{affine_lsq, richardson, simpson_adaptive};

const QUADRATURE_TOL: f64 = 1e-12;

fn check_pair(rs: &ReducedSystem, i: usize, j: usize) -> Result<()> {
    let n = rs.arity();
    if i == j || i >= n || j >= n {
        return Err(Error::BadIndices(format!("({i}, {j}) is not a pair of distinct indices below {n}")));
    }
    Ok(())
}

/// Collects the worst residual of `eval` over `items`, in parallel but with a
/// deterministic tie-break.
fn worst_over<T, F>(items: &[T], eval: F) -> Result<Worst>
where
    T: Sync,
    F: Fn(&T) -> Result<(f64, Vec<f64>)> + Sync,
{
    let partial: Vec<Worst> = items
        .par_chunks(32)
        .map(|chunk| -> Result<Worst> {
            let mut w = Worst::default();
            for item in chunk {
                let (value, at) = eval(item)?;
                w.offer(value, || at);
            }
            Ok(w)
        })
        .collect::<Result<_>>()?;
    Ok(partial.into_iter().fold(Worst::default(), Worst::merge))
}

/// `max_i |P_i/P₀ - Q_i/Q₀|` over the diagonal base points.
pub fn first_order_condition(rs: &ReducedSystem, grid: usize) -> Result<DiagnosticResult> {
    let base = rs.base_points(grid);
    let worst = worst_over(&base, |&u| {
        let x = rs.x_of(u)?;
        let (pw, qw) = (rs.left().weights(), rs.right().weights());
        let (p0, q0) = (pw.total(x)?, qw.total(x)?);
        let mut m: f64 = 0.0;
        for i in 0..rs.arity() {
            m = m.max((pw.value(i, x)? / p0 - qw.value(i, x)? / q0).abs());
        }
        Ok((m, vec![u]))
    })?;
    Ok(DiagnosticResult::from_worst("first_order_condition", worst, FIRST_ORDER_TOL))
}

/// `|h(ΣP_i u_i / ΣP_i) - Σ(rhP_i)(u_i) / Σ(rP_i)(u_i)|` at a single tuple.
pub fn eq3_at(rs: &ReducedSystem, u: &[f64]) -> Result<f64> {
    if u.len() != rs.arity() {
        return Err(Error::domain(format!("tuple has {} coordinates, expected {}", u.len(), rs.arity())));
    }
    let (pw, qw) = (rs.left().weights(), rs.right().weights());
    let (mut s_p, mut s_pu, mut s_rp, mut s_rhp) = (0.0, 0.0, 0.0, 0.0);
    for (i, &ui) in u.iter().enumerate() {
        let x = rs.x_of(ui)?;
        let p = pw.value(i, x)?;
        let r = qw.total(x)? / pw.total(x)?;
        let h = rs.right().generator().eval(x)?;
        s_p += p;
        s_pu += p * ui;
        s_rp += r * p;
        s_rhp += r * h * p;
    }
    Ok((rs.h(s_pu / s_p)? - s_rhp / s_rp).abs())
}

/// Reduced-coordinate equality `h(A_{id,P}(u)) = A_{id,rhP}(u) / ...` over
/// near-diagonal tuples of `J^n`.
pub fn eq3_residual(rs: &ReducedSystem, n: usize, grid: usize, radius: f64) -> Result<DiagnosticResult> {
    if n != rs.arity() {
        return Err(Error::Config(format!("tuple arity {n} does not match the arity {}", rs.arity())));
    }
    let tuples = near_diagonal_tuples(&rs.base_points(grid), n, radius, rs.j_window());
    let worst = worst_over(&tuples, |u| Ok((eq3_at(rs, u)?, u.clone())))?;
    Ok(DiagnosticResult::from_worst("eq3_residual", worst, EQUALITY_TOL))
}

/// Both sides of the pairwise derivative identity at `(u, v)`.
pub fn ij_sides(a: &ReducedPoint, b: &ReducedPoint, i: usize, j: usize) -> (f64, f64) {
    let (u, v) = (a.u, b.u);
    let (pi, pj) = (a.p[i], b.p[j]);
    let (rpi, rpj) = (a.r * pi, b.r * pj);
    let lhs = (pi * (pi + pj) + a.dp[i] * pj * (u - v))
        * (b.dh * rpj * (rpi + rpj) + b.drp(j) * rpi * (b.h - a.h));
    let rhs = (pj * (pi + pj) + b.dp[j] * pi * (v - u))
        * (a.dh * rpi * (rpi + rpj) + a.drp(i) * rpj * (a.h - b.h));
    (lhs, rhs)
}

/// Pairwise identity obtained by differentiating the two-variable equality
/// `A_{id,(P_i,P_j)} = A_{h,(rP_i,rP_j)}` in each variable; residual is
/// `|LHS - RHS| / max(|LHS|, |RHS|, 1)`.
pub fn residual_ij(rs: &ReducedSystem, i: usize, j: usize, grid: usize, radius: f64) -> Result<DiagnosticResult> {
    check_pair(rs, i, j)?;
    let pairs = near_diagonal_tuples(&rs.base_points(grid), 2, radius, rs.j_window());
    let worst = worst_over(&pairs, |uv| {
        let (a, b) = (rs.point(uv[0])?, rs.point(uv[1])?);
        let (lhs, rhs) = ij_sides(&a, &b, i, j);
        Ok(((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0), uv.clone()))
    })?;
    Ok(DiagnosticResult::from_worst(&format!("residual_ij({i},{j})"), worst, DERIVATIVE_TOL))
}

/// `γ = h' r²` on the base points; the residual is its relative spread.
/// Returns the diagnostic and the median of `γ`.
pub fn hprime_r2_constancy(rs: &ReducedSystem, grid: usize) -> Result<(DiagnosticResult, f64)> {
    let base = rs.base_points(grid);
    let gammas: Vec<(f64, f64)> = base
        .par_iter()
        .map(|&u| {
            let pt = rs.point(u)?;
            Ok((u, pt.dh * pt.r * pt.r))
        })
        .collect::<Result<_>>()?;
    let by_value = |a: &&(f64, f64), b: &&(f64, f64)| a.1.total_cmp(&b.1);
    let lo = gammas.iter().min_by(by_value).copied().unwrap_or((f64::NAN, f64::NAN));
    let hi = gammas.iter().max_by(by_value).copied().unwrap_or((f64::NAN, f64::NAN));
    let scale = gammas.iter().fold(0.0f64, |m, g| m.max(g.1.abs()));
    let mut sorted: Vec<f64> = gammas.iter().map(|g| g.1).collect();
    sorted.sort_by(f64::total_cmp);
    let median = match sorted.len() {
        0 => f64::NAN,
        k if k % 2 == 1 => sorted[k / 2],
        k => 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]),
    };
    let residual = if scale > 0.0 { (hi.1 - lo.1) / scale } else { f64::INFINITY };
    let diag = DiagnosticResult::new("hprime_r2_constancy", residual, DERIVATIVE_TOL, vec![hi.0, lo.0]);
    Ok((diag, median))
}

/// `(r'(w + t) - r'(w - t)) / (2t)`.
pub fn symmetric_derivative_rprime(rs: &ReducedSystem, w: f64, t: f64) -> Result<f64> {
    let j = rs.j();
    if !(t > 0.0 && j.contains(w - t) && j.contains(w + t)) {
        return Err(Error::domain(format!("[{}, {}] is not inside J = {j}", w - t, w + t)));
    }
    Ok((rs.dr(w + t)? - rs.dr(w - t)?) / (2.0 * t))
}

/// Outcome of the two affinity checks on `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityCheck {
    /// Richardson limit of the symmetric derivative of `r'`.
    pub curvature: DiagnosticResult,
    /// Relative residual of the least-squares line through `r`.
    pub fit: DiagnosticResult,
    pub c: f64,
    pub d: f64,
}

impl AffinityCheck {
    pub fn pass(&self) -> bool {
        self.curvature.pass && self.fit.pass
    }
}

pub fn affinity_of_r(rs: &ReducedSystem, grid: usize) -> Result<AffinityCheck> {
    let base = rs.base_points(grid);
    let window = rs.j_window();
    let step = rs.default_radius();
    let curvature = worst_over(&base, |&w| {
        let t = local_radius(w, step, window);
        let dr = |s: f64| rs.dr(s).unwrap_or(f64::NAN);
        Ok((richardson(dr, w, t, 3)?.abs(), vec![w]))
    })?;
    let points: Vec<(f64, f64)> = base.iter().map(|&u| Ok((u, rs.r(u)?))).collect::<Result<_>>()?;
    let line = affine_lsq(&points)?;
    Ok(AffinityCheck {
        curvature: DiagnosticResult::from_worst("affinity_of_r.symmetric_derivative", curvature, DERIVATIVE_TOL),
        fit: DiagnosticResult::new(
            "affinity_of_r.affine_fit",
            line.max_rel_residual,
            AFFINE_FIT_TOL,
            vec![line.worst_at],
        ),
        c: line.slope,
        d: line.intercept,
    })
}

/// `∫_v^u 1/r²`, oriented.
fn inv_r2_integral(rs: &ReducedSystem, v: f64, u: f64) -> Result<f64> {
    let f = |s: f64| rs.r(s).map(|r| 1.0 / (r * r)).unwrap_or(f64::NAN);
    if u >= v {
        Ok(simpson_adaptive(f, v, u, QUADRATURE_TOL)?)
    } else {
        Ok(-simpson_adaptive(f, u, v, QUADRATURE_TOL)?)
    }
}

/// Both sides of the integrated pairwise identity (the form in which `h` has
/// been eliminated through `h' = γ / r²`) at `(u, v)` with `u ≠ v`.
pub fn ij_plus_sides(rs: &ReducedSystem, a: &ReducedPoint, b: &ReducedPoint, i: usize, j: usize) -> Result<(f64, f64)> {
    let (u, v) = (a.u, b.u);
    let (pi, pj, dpi, dpj) = (a.p[i], b.p[j], a.dp[i], b.dp[j]);
    let (ru, rv, dru, drv) = (a.r, b.r, a.dr, b.dr);
    let integral = inv_r2_integral(rs, v, u)?;
    let lhs = (rv - ru) / (ru * rv * (u - v));
    let t1 = (rv * dpj * pi * pi + ru * dpi * pj * pj) / (ru * pi * rv * pj * (pi + pj));
    let t2 = (a.drp(i) * rv * pj * pj + b.drp(j) * ru * pi * pi) / (pi * pj * (ru * pi + rv * pj)) * integral / (u - v);
    let t3 = (rv * dpj * dru * pi - ru * dpi * drv * pj) / ((pi + pj) * (ru * pi + rv * pj)) * integral;
    Ok((lhs, t1 - t2 + t3))
}

/// Optional cross-check of the constancy of `h' r²`: the pairwise identity
/// with `h` eliminated, using adaptive Simpson for `∫ 1/r²`. Pairs on the
/// diagonal are skipped.
pub fn ij_plus_residual(rs: &ReducedSystem, i: usize, j: usize, grid: usize, radius: f64) -> Result<DiagnosticResult> {
    check_pair(rs, i, j)?;
    let pairs: Vec<Vec<f64>> = near_diagonal_tuples(&rs.base_points(grid), 2, radius, rs.j_window())
        .into_iter()
        .filter(|uv| uv[0] != uv[1])
        .collect();
    let worst = worst_over(&pairs, |uv| {
        let (a, b) = (rs.point(uv[0])?, rs.point(uv[1])?);
        let (lhs, rhs) = ij_plus_sides(rs, &a, &b, i, j)?;
        Ok(((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0), uv.clone()))
    })?;
    Ok(DiagnosticResult::from_worst(&format!("ij_plus_residual({i},{j})"), worst, DERIVATIVE_TOL))
}
