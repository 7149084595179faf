//! Deciding whether two generalized Bajraktarević means coincide.
//!
//! The pipeline works in reduced coordinates: with `u = f(x)` the left mean
//! becomes a weighted arithmetic mean with weights `P = p ∘ f⁻¹`, and the
//! right one is generated by `h = g ∘ f⁻¹` with weights `Q = q ∘ f⁻¹`. Equality
//! forces `Q = r P` with `r = Q₀ / P₀`, `h' r²` constant and `r` affine, which
//! in turn pins down Möbius parameters `(a, b, c, d)` with
//! `g = (af + b) / (cf + d)` and `q = (cf + d) p`.

mod canonical;
mod decide;
mod diagnostics;
mod fit;
mod grid;
mod reduce;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monotone_fn::Interval;

pub use canonical::canonical_transform;
pub use decide::{decide_equality, run_diagnostics, DecideConfig, Regularity, Route};
pub use diagnostics::{
    affinity_of_r, eq3_residual, first_order_condition, hprime_r2_constancy, ij_plus_residual, residual_ij,
    symmetric_derivative_rprime, AffinityCheck,
};
pub use fit::{fit_moebius, fit_reduced, validate_on_interval, MoebiusFit};
pub use grid::{near_diagonal_tuples, verify_equality_grid, GridSpec};
pub use reduce::{reduce, reduce_on, ReducedPoint, ReducedSystem};

/// Grid equality tolerance on mean values.
pub const EQUALITY_TOL: f64 = 1e-9;
/// Threshold for diagnostics assembled from derivatives.
pub const DERIVATIVE_TOL: f64 = 1e-7;
pub const FIRST_ORDER_TOL: f64 = 1e-9;
/// Maximal relative residual of the affine fit of `r`.
pub const AFFINE_FIT_TOL: f64 = 1e-9;
/// Relative tolerance when checking fitted parameters on the whole interval.
pub const VALIDATION_TOL: f64 = 1e-8;
/// Relative tolerance between `h' r²` and `ad - bc`.
pub const GAMMA_TOL: f64 = 1e-6;

/// Parameters of `u ↦ (au + b) / (cu + d)` with `ad ≠ bc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoebiusParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MoebiusParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = (a * d).abs().max((b * c).abs()).max(1.0);
        if !det.is_finite() || det.abs() <= 1e-12 * scale {
            return Err(Error::DegenerateParams(det));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn identity() -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, y: f64) -> f64 {
        (self.a * y + self.b) / (self.c * y + self.d)
    }

    /// The weight factor `cy + d`.
    pub fn denominator(&self, y: f64) -> f64 {
        self.c * y + self.d
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// `max |θ - other| / max |θ|` over the four components.
    pub fn relative_distance(&self, other: &MoebiusParams) -> f64 {
        let (x, y) = (self.as_array(), other.as_array());
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = x.iter().zip(&y).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        diff / scale
    }
}

/// One named check: `pass` holds exactly when `max_residual <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticResult {
    pub name: String,
    pub max_residual: f64,
    pub threshold: f64,
    pub pass: bool,
    pub witness: Vec<f64>,
}

impl DiagnosticResult {
    pub fn new(name: impl Into<String>, max_residual: f64, threshold: f64, witness: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            max_residual,
            threshold,
            pass: max_residual <= threshold,
            witness,
        }
    }

    pub(crate) fn from_worst(name: &str, worst: Worst, threshold: f64) -> Self {
        Self::new(name, worst.value, threshold, worst.at)
    }
}

/// Running maximum with the first point that attains it.
///
/// NaN residuals win over everything, so a failed evaluation never passes.
#[derive(Debug, Clone, Default)]
pub(crate) struct Worst {
    pub value: f64,
    pub at: Vec<f64>,
}

impl Worst {
    pub fn offer(&mut self, value: f64, at: impl FnOnce() -> Vec<f64>) {
        if self.value.is_nan() {
            return;
        }
        if value.is_nan() || value > self.value || self.at.is_empty() {
            self.value = if value.is_nan() { f64::NAN } else { value.max(self.value) };
            self.at = at();
        }
    }

    pub fn merge(mut self, other: Worst) -> Worst {
        if !other.at.is_empty() {
            let Worst { value, at } = other;
            self.offer(value, || at);
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Equal,
    NotEqual,
    Inconclusive,
}

impl Verdict {
    /// Process exit code reported by the command-line tool.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Equal => 0,
            Verdict::NotEqual => 1,
            Verdict::Inconclusive => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub interval: Interval,
    pub subinterval: Interval,
    pub n: usize,
    pub grid: usize,
    pub radius: f64,
    pub probes: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityReport {
    pub verdict: Verdict,
    pub route: Option<Route>,
    /// `[a, b, c]` when the three-weight route compared `(p_a, p_b + p_c)`.
    pub merged: Option<[usize; 3]>,
    pub params: Option<MoebiusParams>,
    pub gamma: Option<f64>,
    /// Tuple separating the two means, present for `NotEqual`.
    pub witness: Option<Vec<f64>>,
    /// Smallest sampled relative gap between the weights the route relies on.
    pub weight_margin: Option<f64>,
    pub diagnostics: Vec<DiagnosticResult>,
    pub grid: GridMetadata,
}

impl EqualityReport {
    pub fn diagnostic(&self, name: &str) -> Option<&DiagnosticResult> {
        self.diagnostics.iter().find(|d| d.name == name)
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moebius_guard() {
        assert!(MoebiusParams::new(1.0, 2.0, 2.0, 4.0).is_err());
        assert!(MoebiusParams::new(0.0, 0.0, 0.0, 0.0).is_err());
        let m = MoebiusParams::new(0.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(m.det(), -1.0);
        assert_eq!(m.apply(4.0), 0.25);
    }

    #[test]
    fn worst_keeps_first_maximum_and_nan() {
        let mut w = Worst::default();
        w.offer(1.0, || vec![1.0]);
        w.offer(1.0, || vec![2.0]);
        assert_eq!(w.at, vec![1.0]);
        w.offer(f64::NAN, || vec![3.0]);
        w.offer(5.0, || vec![4.0]);
        assert!(w.value.is_nan());
        assert_eq!(w.at, vec![3.0]);
        let d = DiagnosticResult::from_worst("x", w, 1.0);
        assert!(!d.pass);
    }

    #[test]
    fn report_serializes() {
        let r = EqualityReport {
            verdict: Verdict::Equal,
            route: Some(Route::Main),
            merged: None,
            params: Some(MoebiusParams::identity()),
            gamma: Some(1.0),
            witness: None,
            weight_margin: None,
            diagnostics: vec![DiagnosticResult::new("a", 0.0, 1.0, vec![0.5])],
            grid: GridMetadata {
                interval: Interval::new(0.0, f64::INFINITY).unwrap(),
                subinterval: Interval::new(0.0, 1.0).unwrap(),
                n: 2,
                grid: 9,
                radius: 0.1,
                probes: 0,
                seed: 42,
            },
        };
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"verdict\":\"Equal\""), "{s}");
        let back: EqualityReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
