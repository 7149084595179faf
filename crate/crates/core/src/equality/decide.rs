use serde::{Deserialize, Serialize};

use super::diagnostics::{
    eq3_residual, first_order_condition, hprime_r2_constancy, ij_plus_residual, residual_ij,
};
use super::fit::{fit_reduced, validate_on_interval};
use super::grid::{sweep, GridSpec};
use super::reduce::{reduce_on, ReducedSystem};
use super::{DiagnosticResult, EqualityReport, GridMetadata, MoebiusParams, Verdict, GAMMA_TOL};
use crate::error::{Error, Result};
use crate::means::{MeanSpec, WeightFamily};
use crate::monotone_fn::{Expr, Interval};

/// Relative gap below which two weight values count as equal.
const WEIGHT_GAP_TOL: f64 = 1e-9;
const WEIGHT_SAMPLES: usize = 64;
const MAX_SHRINKS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Two weights `p_i ≠ p_j` on the subinterval.
    Main,
    /// Three weights, none equal to the sum of the other two at some point.
    MainPlus,
    /// `Main` if a distinct pair is declared, else `MainPlus` if a triple is.
    #[default]
    Auto,
}

/// Hypotheses declared alongside a mean. Indices are 0-based.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regularity {
    /// Subinterval `I₀` on which the hypotheses hold; defaults to `I`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subinterval: Option<Interval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distinct_pair: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triple: Option<[usize; 3]>,
    /// Weights declared continuously differentiable; `None` means all of them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub differentiable: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecideConfig {
    pub grid: GridSpec,
    pub route: Route,
    pub regularity: Regularity,
    /// Also run the integrated pairwise identity (adaptive quadrature).
    pub extended: bool,
}

impl DecideConfig {
    pub fn new(n: usize, regularity: Regularity) -> Self {
        let mut grid = GridSpec::new(n);
        grid.probes = 32;
        Self {
            grid,
            route: Route::Auto,
            regularity,
            extended: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Plan {
    Main(usize, usize),
    MainPlus(usize, usize, usize),
}

fn resolve(left: &MeanSpec, cfg: &DecideConfig) -> Result<Plan> {
    let reg = &cfg.regularity;
    let n = left.arity();
    let plan = match (cfg.route, reg.distinct_pair, reg.triple) {
        (Route::Main | Route::Auto, Some([i, j]), _) => Plan::Main(i, j),
        (Route::MainPlus | Route::Auto, _, Some([i, j, k])) => Plan::MainPlus(i, j, k),
        (Route::Main, None, _) => return Err(Error::Config("route main needs a distinct weight pair".into())),
        (Route::MainPlus, _, None) => return Err(Error::Config("route main-plus needs a weight triple".into())),
        (Route::Auto, None, None) => {
            return Err(Error::Config(
                "no regularity declared: give a distinct weight pair or a weight triple".into(),
            ))
        }
    };
    let indices: Vec<usize> = match plan {
        Plan::Main(i, j) => {
            if n < 2 || i == j {
                return Err(Error::Config(format!("({i}, {j}) is not a pair of distinct indices")));
            }
            vec![i, j]
        }
        Plan::MainPlus(i, j, k) => {
            if n < 3 || i == j || j == k || i == k {
                return Err(Error::Config(format!("({i}, {j}, {k}) is not a triple of distinct indices")));
            }
            vec![i, j, k]
        }
    };
    if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
        return Err(Error::Config(format!("weight index {bad} is out of range for arity {n}")));
    }
    if let Some(diff) = &reg.differentiable {
        if let Some(missing) = indices.iter().find(|i| !diff.contains(i)) {
            return Err(Error::Config(format!("weight {missing} is not declared differentiable")));
        }
    }
    if let Some(sub) = reg.subinterval {
        if !sub.is_subset_of(&left.domain()) {
            return Err(Error::Config(format!("{sub} is not a subinterval of {}", left.domain())));
        }
    }
    Ok(plan)
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// Smallest sampled relative gap `|p_i - p_j|`; a configuration error if the
/// weights coincide somewhere.
fn distinct_margin(m: &MeanSpec, i: usize, j: usize, window: Interval) -> Result<f64> {
    let w = m.weights();
    let mut margin = f64::INFINITY;
    for x in window.sample_points(WEIGHT_SAMPLES) {
        let gap = relative_gap(w.value(i, x)?, w.value(j, x)?);
        if gap <= WEIGHT_GAP_TOL {
            return Err(Error::Config(format!("weights {i} and {j} coincide at {x}")));
        }
        margin = margin.min(gap);
    }
    Ok(margin)
}

/// Picks `(a, b, c)` with `p_a ≠ p_b + p_c` at the midpoint of `window`, then
/// halves the window around the midpoint until the relative gap stays above
/// half its midpoint value at every sample. Returns the triple, the shrunken
/// window and the sampled margin.
fn split_triple(m: &MeanSpec, (i, j, k): (usize, usize, usize), window: Interval) -> Result<([usize; 3], Interval, f64)> {
    let w = m.weights();
    let x0 = window.midpoint();
    let gap_at = |[a, b, c]: [usize; 3], x: f64| -> Result<f64> {
        Ok(relative_gap(w.value(a, x)?, w.value(b, x)? + w.value(c, x)?))
    };
    let mut chosen = None;
    for cand in [[i, j, k], [j, i, k], [k, i, j]] {
        let gap = gap_at(cand, x0)?;
        if gap > WEIGHT_GAP_TOL {
            chosen = Some((cand, gap));
            break;
        }
    }
    let Some((triple, gap0)) = chosen else {
        return Err(Error::Config(format!(
            "at {x0} every weight of ({i}, {j}, {k}) equals the sum of the other two, which positive weights exclude"
        )));
    };
    let mut sub = window.working_window();
    for _ in 0..MAX_SHRINKS {
        let mut margin = f64::INFINITY;
        for x in sub.sample_points(WEIGHT_SAMPLES) {
            margin = margin.min(gap_at(triple, x)?);
        }
        if margin >= 0.5 * gap0 {
            return Ok((triple, sub, margin));
        }
        let quarter = 0.25 * sub.length();
        sub = Interval::new(x0 - quarter, x0 + quarter)?;
    }
    Err(Error::Config(format!("could not isolate a neighbourhood of {x0} where the weights stay apart")))
}

/// The two-weight means `(p_a, p_b + p_c)` and `(q_a, q_b + q_c)`.
fn merge_weights(m: &MeanSpec, [a, b, c]: [usize; 3]) -> Result<MeanSpec> {
    let e = m.weights().exprs();
    let merged = vec![e[a].clone(), Expr::sum(vec![e[b].clone(), e[c].clone()])];
    m.with_weights(WeightFamily::new(merged, m.domain())?)
}

/// Pairwise diagnostics, fit and the `γ = ad - bc` cross-check on a reduced
/// system. Returns the rows, the fitted parameters and the median of `h' r²`.
fn pair_diagnostics(
    rs: &ReducedSystem,
    i: usize,
    j: usize,
    grid: usize,
    extended: bool,
) -> Result<(Vec<DiagnosticResult>, MoebiusParams, f64)> {
    let radius = rs.default_radius();
    let mut rows = vec![residual_ij(rs, i, j, grid, radius)?];
    let (constancy, gamma) = hprime_r2_constancy(rs, grid)?;
    rows.push(constancy);
    if extended {
        rows.push(ij_plus_residual(rs, i, j, grid, radius)?);
    }
    let fit = fit_reduced(rs, grid)?;
    rows.push(fit.affinity.curvature.clone());
    rows.push(fit.affinity.fit.clone());
    rows.push(fit.hr_fit.clone());
    let det = fit.params.det();
    rows.push(DiagnosticResult::new(
        "gamma_consistency",
        (gamma - det).abs() / det.abs(),
        GAMMA_TOL,
        vec![gamma, det],
    ));
    Ok((rows, fit.params, gamma))
}

fn global_diagnostics(left: &MeanSpec, right: &MeanSpec, grid: usize) -> Result<Vec<DiagnosticResult>> {
    let rs = reduce_on(left, right, left.domain())?;
    Ok(vec![
        first_order_condition(&rs, grid)?,
        eq3_residual(&rs, rs.arity(), grid, rs.default_radius())?,
    ])
}

/// Runs the full decision procedure: near-diagonal sweep, reduction,
/// necessary conditions, Möbius fit on the declared subinterval and
/// validation of the fit on the whole interval.
pub fn decide_equality(left: &MeanSpec, right: &MeanSpec, cfg: &DecideConfig) -> Result<EqualityReport> {
    if left.arity() != right.arity() || left.domain() != right.domain() {
        return Err(Error::Config("both means need the same interval and arity".into()));
    }
    let plan = resolve(left, cfg)?;
    let domain = left.domain();
    let window = cfg.regularity.subinterval.unwrap_or(domain);

    let (equality, radius) = sweep(left, right, &cfg.grid)?;
    let mut report = EqualityReport {
        verdict: Verdict::Inconclusive,
        route: Some(match plan {
            Plan::Main(..) => Route::Main,
            Plan::MainPlus(..) => Route::MainPlus,
        }),
        merged: None,
        params: None,
        gamma: None,
        witness: None,
        weight_margin: None,
        diagnostics: vec![equality.clone()],
        grid: GridMetadata {
            interval: domain,
            subinterval: window,
            n: cfg.grid.n,
            grid: cfg.grid.grid,
            radius,
            probes: cfg.grid.probes,
            seed: cfg.grid.seed,
        },
    };
    if !equality.pass {
        // confirm with the independent evaluator before claiming a separation
        let x = &equality.witness;
        let tol = 1e-3 * cfg.grid.tol;
        let gap = (left.mean_by_sign_characterization(x, tol)? - right.mean_by_sign_characterization(x, tol)?).abs();
        if gap > cfg.grid.tol {
            report.verdict = Verdict::NotEqual;
            report.witness = Some(x.clone());
        }
        return Ok(report);
    }

    report.diagnostics.extend(global_diagnostics(left, right, cfg.grid.grid)?);

    let (l2, r2, i, j, sub, margin) = match plan {
        Plan::Main(i, j) => {
            let margin = distinct_margin(left, i, j, window)?;
            (left.clone(), right.clone(), i, j, window, margin)
        }
        Plan::MainPlus(i, j, k) => {
            let (triple, sub, margin) = split_triple(left, (i, j, k), window)?;
            report.merged = Some(triple);
            (merge_weights(left, triple)?, merge_weights(right, triple)?, 0, 1, sub, margin)
        }
    };
    report.weight_margin = Some(margin);
    report.grid.subinterval = sub;

    let rs = reduce_on(&l2, &r2, sub)?;
    let (rows, params, gamma) = pair_diagnostics(&rs, i, j, cfg.grid.grid, cfg.extended)?;
    report.diagnostics.extend(rows);
    report.diagnostics.push(validate_on_interval(left, right, &params)?);
    report.params = Some(params);
    report.gamma = Some(gamma);
    if report.diagnostics.iter().all(|d| d.pass) {
        report.verdict = Verdict::Equal;
    }
    Ok(report)
}

/// Every diagnostic on the whole interval, without requiring declared
/// hypotheses: the pair defaults to the declared one or `(0, 1)`.
pub fn run_diagnostics(left: &MeanSpec, right: &MeanSpec, cfg: &DecideConfig) -> Result<Vec<DiagnosticResult>> {
    let mut rows = vec![sweep(left, right, &cfg.grid)?.0];
    rows.extend(global_diagnostics(left, right, cfg.grid.grid)?);
    let [i, j] = cfg.regularity.distinct_pair.unwrap_or([0, 1]);
    let window = cfg.regularity.subinterval.unwrap_or(left.domain());
    let rs = reduce_on(left, right, window)?;
    let (pair_rows, params, _) = pair_diagnostics(&rs, i, j, cfg.grid.grid, true)?;
    rows.extend(pair_rows);
    rows.push(validate_on_interval(left, right, &params)?);
    Ok(rows)
}
