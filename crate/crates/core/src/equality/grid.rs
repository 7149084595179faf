use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::reduce::{BASE_FRACTION, RADIUS_FRACTION};
use super::{DiagnosticResult, Worst, EQUALITY_TOL};
use crate::error::{Error, Result};
use crate::means::MeanSpec;
use crate::monotone_fn::Interval;
use crate::numerics::chebyshev_nodes;

/// Geometry of a near-diagonal equality sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    /// Number of diagonal base points.
    pub grid: usize,
    /// Perturbation radius; `None` means 5% of the working window.
    pub radius: Option<f64>,
    pub tol: f64,
    /// Extra uniformly random tuples drawn from the same neighbourhood.
    pub probes: usize,
    pub seed: u64,
}

impl GridSpec {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            grid: 12,
            radius: None,
            tol: EQUALITY_TOL,
            probes: 0,
            seed: 42,
        }
    }

    pub fn radius_for(&self, domain: Interval) -> f64 {
        self.radius
            .unwrap_or_else(|| RADIUS_FRACTION * domain.working_window().length())
    }
}

/// Offsets in units of the radius: the full `{-1, 0, 1}^n` cube for small `n`,
/// otherwise the `2^n` corners plus the points on the coordinate axes.
fn offset_patterns(n: usize) -> Vec<Vec<f64>> {
    if n <= 5 {
        let mut out = vec![Vec::with_capacity(n)];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|v: Vec<f64>| {
                    [-1.0, 0.0, 1.0].into_iter().map(move |s| {
                        let mut w = v.clone();
                        w.push(s);
                        w
                    })
                })
                .collect();
        }
        return out;
    }
    let mut out = Vec::new();
    if n <= 12 {
        for mask in 0u32..(1 << n) {
            out.push((0..n).map(|k| if mask >> k & 1 == 1 { 1.0 } else { -1.0 }).collect());
        }
    } else {
        out.push(vec![1.0; n]);
        out.push(vec![-1.0; n]);
    }
    for k in 0..n {
        for s in [-1.0, 1.0] {
            let mut v = vec![0.0; n];
            v[k] = s;
            out.push(v);
        }
    }
    out
}

/// Largest radius not exceeding `radius` that keeps `t ± radius` inside `window`.
pub(crate) fn local_radius(t: f64, radius: f64, window: Interval) -> f64 {
    radius.min(0.999 * (t - window.lo())).min(0.999 * (window.hi() - t))
}

/// Near-diagonal tuples `(t + s_1 ρ, ..., t + s_n ρ)` around every base point,
/// with the radius shrunk per point so the tuple stays inside `window`.
pub fn near_diagonal_tuples(base: &[f64], n: usize, radius: f64, window: Interval) -> Vec<Vec<f64>> {
    let patterns = offset_patterns(n);
    base.iter()
        .flat_map(|&t| {
            let rho = local_radius(t, radius, window);
            patterns
                .iter()
                .map(move |s| s.iter().map(|&sk| t + sk * rho).collect::<Vec<f64>>())
        })
        .collect()
}

fn random_tuples(base_window: Interval, domain: Interval, spec: &GridSpec, radius: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.probes)
        .map(|_| {
            let t = rng.gen_range(base_window.lo()..base_window.hi());
            let rho = local_radius(t, radius, domain);
            (0..spec.n).map(|_| t + rho * rng.gen_range(-1.0..=1.0)).collect()
        })
        .collect()
}

/// Maximal `|A_{f,p}(x) - A_{g,q}(x)|` over the sweep described by `spec`,
/// together with the radius that was used.
pub(crate) fn sweep(left: &MeanSpec, right: &MeanSpec, spec: &GridSpec) -> Result<(DiagnosticResult, f64)> {
    if left.domain() != right.domain() {
        return Err(Error::domain(format!(
            "means live on different intervals: {} and {}",
            left.domain(),
            right.domain()
        )));
    }
    if spec.n != left.arity() || spec.n != right.arity() {
        return Err(Error::Config(format!(
            "tuple arity {} does not match the means' arities {} and {}",
            spec.n,
            left.arity(),
            right.arity()
        )));
    }
    if spec.grid < 3 {
        return Err(Error::Config(format!("grid must have at least 3 points, got {}", spec.grid)));
    }
    let domain = left.domain();
    let radius = spec.radius_for(domain);
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Config(format!("radius must be positive, got {radius}")));
    }
    let base_window = domain.shrink(BASE_FRACTION);
    let base = chebyshev_nodes(base_window.lo(), base_window.hi(), spec.grid);
    let mut tuples = near_diagonal_tuples(&base, spec.n, radius, domain);
    tuples.extend(random_tuples(base_window, domain, spec, radius));

    let chunks: Vec<Worst> = tuples
        .par_chunks(64)
        .map(|chunk| -> Result<Worst> {
            let mut worst = Worst::default();
            for x in chunk {
                let gap = (left.mean_direct(x)? - right.mean_direct(x)?).abs();
                worst.offer(gap, || x.clone());
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    let worst = chunks.into_iter().fold(Worst::default(), Worst::merge);
    Ok((DiagnosticResult::from_worst("equality_grid", worst, spec.tol), radius))
}

/// Deterministic near-diagonal comparison of two means.
pub fn verify_equality_grid(
    left: &MeanSpec,
    right: &MeanSpec,
    n: usize,
    grid: usize,
    radius: f64,
    tol: f64,
) -> Result<DiagnosticResult> {
    let spec = GridSpec {
        n,
        grid,
        radius: Some(radius),
        tol,
        probes: 0,
        seed: 0,
    };
    Ok(sweep(left, right, &spec)?.0)
}
