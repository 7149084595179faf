use super::diagnostics::{affinity_of_r, AffinityCheck};
use super::reduce::{reduce, ReducedSystem};
use super::{DiagnosticResult, MoebiusParams, Worst, AFFINE_FIT_TOL, VALIDATION_TOL};
use crate::error::{Error, Result};
use crate::means::MeanSpec;
use crate::numerics::affine_lsq;

const VALIDATION_SAMPLES: usize = 256;

/// Parameters recovered from a reduced system, with the evidence behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct MoebiusFit {
    pub params: MoebiusParams,
    pub affinity: AffinityCheck,
    /// Relative residual of the line through `h·r`.
    pub hr_fit: DiagnosticResult,
}

/// `(c, d)` from the line through `r`, then `(a, b)` from the line through
/// `h·r`. No thresholds are enforced here.
pub fn fit_reduced(rs: &ReducedSystem, grid: usize) -> Result<MoebiusFit> {
    let affinity = affinity_of_r(rs, grid)?;
    let points: Vec<(f64, f64)> = rs
        .base_points(grid)
        .into_iter()
        .map(|u| Ok((u, rs.h(u)? * rs.r(u)?)))
        .collect::<Result<_>>()?;
    let line = affine_lsq(&points)?;
    Ok(MoebiusFit {
        params: MoebiusParams {
            a: line.slope,
            b: line.intercept,
            c: affinity.c,
            d: affinity.d,
        },
        hr_fit: DiagnosticResult::new("hr_affine_fit", line.max_rel_residual, AFFINE_FIT_TOL, vec![line.worst_at]),
        affinity,
    })
}

/// Checks `g = (af + b)/(cf + d)` and `q_i = (cf + d) p_i` on sample points of
/// the whole interval. Both residuals are relative (the first one relative to
/// `max(|g|, 1)`).
pub fn validate_on_interval(left: &MeanSpec, right: &MeanSpec, params: &MoebiusParams) -> Result<DiagnosticResult> {
    let (f, g) = (left.generator(), right.generator());
    let (p, q) = (left.weights(), right.weights());
    let mut worst = Worst::default();
    for x in left.domain().sample_points(VALIDATION_SAMPLES) {
        let fx = f.eval(x)?;
        let gx = g.eval(x)?;
        let mut e = (gx - params.apply(fx)).abs() / gx.abs().max(1.0);
        let factor = params.denominator(fx);
        for i in 0..left.arity() {
            let qi = q.value(i, x)?;
            e = e.max((qi - factor * p.value(i, x)?).abs() / qi);
        }
        worst.offer(if e.is_finite() { e } else { f64::NAN }, || vec![x]);
    }
    Ok(DiagnosticResult::from_worst("validation_on_interval", worst, VALIDATION_TOL))
}

/// Recovers `(a, b, c, d)` with `g = (af + b)/(cf + d)` and `q = (cf + d) p`,
/// and validates them on all of `I`.
pub fn fit_moebius(left: &MeanSpec, right: &MeanSpec, grid: usize) -> Result<(MoebiusParams, DiagnosticResult)> {
    let rs = reduce(left, right)?;
    let fit = fit_reduced(&rs, grid)?;
    if !fit.affinity.pass() {
        let failed = if fit.affinity.fit.pass { &fit.affinity.curvature } else { &fit.affinity.fit };
        return Err(Error::FitFailed {
            reason: format!("r is not affine: {} = {:e}", failed.name, failed.max_residual),
            witness: failed.witness.clone(),
        });
    }
    let validation = validate_on_interval(left, right, &fit.params)?;
    if !validation.pass {
        return Err(Error::FitFailed {
            reason: format!(
                "fitted parameters {:?} miss by {:e} on the interval",
                fit.params.as_array(),
                validation.max_residual
            ),
            witness: validation.witness,
        });
    }
    Ok((fit.params, validation))
}
