use super::MoebiusParams;
use crate::error::{Error, Result};
use crate::means::{MeanSpec, WeightFamily};
use crate::monotone_fn::{Expr, MonotoneFunction};

/// The canonical partner `(g, q)` of `m = (f, p)`: `g = (af + b)/(cf + d)` and
/// `q_i = (cf + d) p_i`. The two means coincide whenever `cf + d > 0` on `I`.
///
/// Since `cf + d` is affine in the value of `f`, positivity on `I` reduces to
/// its limits at the ends of the range hull.
pub fn canonical_transform(m: &MeanSpec, params: &MoebiusParams) -> Result<MeanSpec> {
    let MoebiusParams { a, b, c, d } = *params;
    let f = m.generator();
    let hull = f.range_hull();
    for end in [hull.lo(), hull.hi()] {
        let value = if end.is_infinite() {
            if c == 0.0 {
                d
            } else {
                c * end
            }
        } else {
            c * end + d
        };
        if value < 0.0 || (value == 0.0 && c == 0.0) || value.is_nan() {
            return Err(sign_violation(m, params, end));
        }
    }

    let g = f.expr().map_branches(|branch| Expr::moebius(a, b, c, d, branch.clone()));
    let factor = if c == 0.0 {
        Expr::constant(d)
    } else {
        Expr::affine(c, d, f.expr().clone())
    };
    let q = m
        .weights()
        .exprs()
        .iter()
        .map(|p| Expr::product(vec![factor.clone(), p.clone()]))
        .collect();
    let domain = m.domain();
    MeanSpec::new(MonotoneFunction::new(g, domain)?, WeightFamily::new(q, domain)?)
}

/// Locates a point of `I` where `cf + d <= 0`, starting from the offending end
/// of the range hull.
fn sign_violation(m: &MeanSpec, params: &MoebiusParams, end: f64) -> Error {
    let hull = m.generator().range_hull();
    let root = -params.d / params.c;
    // a value of f strictly between the root of cy + d and the bad end
    let y = if params.c == 0.0 || !root.is_finite() || !hull.contains(root) {
        let w = hull.working_window();
        if end == hull.lo() {
            w.lo() + 1e-3 * w.length()
        } else {
            w.hi() - 1e-3 * w.length()
        }
    } else if end.is_finite() {
        0.5 * (root + end)
    } else {
        root + (end.signum()) * root.abs().max(1.0)
    };
    match m.inverse().eval(y) {
        Ok(x) => {
            let fx = m.generator().eval(x).unwrap_or(y);
            Error::SignViolation {
                x,
                value: params.denominator(fx),
            }
        }
        Err(e) => e,
    }
}
