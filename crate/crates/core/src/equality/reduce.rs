use crate::error::{Error, Result};
use crate::means::MeanSpec;
use crate::monotone_fn::Interval;
use crate::numerics::chebyshev_nodes;

/// Fraction of the sampling window covered by diagonal base points.
pub(crate) const BASE_FRACTION: f64 = 0.9;
/// Default perturbation radius as a fraction of the window length.
pub(crate) const RADIUS_FRACTION: f64 = 0.05;

/// The pair `(A_{f,p}, A_{g,q})` viewed in the coordinate `u = f(x)`.
///
/// Nothing is composed symbolically: every quantity is evaluated at a point
/// `u` by inverting `f` exactly and applying the chain rule, e.g.
/// `h'(u) = g'(x) / f'(x)` and `P_i'(u) = p_i'(x) / f'(x)` with `x = f⁻¹(u)`.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    left: MeanSpec,
    right: MeanSpec,
    j: Interval,
    window: Interval,
    j_window: Interval,
}

/// Everything the diagnostics need at one point of `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPoint {
    pub u: f64,
    pub x: f64,
    pub h: f64,
    pub dh: f64,
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub q: Vec<f64>,
    pub dq: Vec<f64>,
    pub r: f64,
    pub dr: f64,
}

impl ReducedPoint {
    /// `(r P_i)'(u)`.
    pub fn drp(&self, i: usize) -> f64 {
        self.dr * self.p[i] + self.r * self.dp[i]
    }

    pub fn p0(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn q0(&self) -> f64 {
        self.q.iter().sum()
    }
}

/// Reduction on the whole interval.
pub fn reduce(left: &MeanSpec, right: &MeanSpec) -> Result<ReducedSystem> {
    reduce_on(left, right, left.domain())
}

/// Reduction whose sampling window is the subinterval `window ⊆ I`.
pub fn reduce_on(left: &MeanSpec, right: &MeanSpec, window: Interval) -> Result<ReducedSystem> {
    if left.domain() != right.domain() {
        return Err(Error::domain(format!(
            "means live on different intervals: {} and {}",
            left.domain(),
            right.domain()
        )));
    }
    if left.arity() != right.arity() {
        return Err(Error::domain(format!(
            "means have different arities: {} and {}",
            left.arity(),
            right.arity()
        )));
    }
    if !window.is_subset_of(&left.domain()) {
        return Err(Error::domain(format!("{window} is not a subinterval of {}", left.domain())));
    }
    if let Some(&at) = left.generator().jumps().first() {
        return Err(Error::NotContinuous(at));
    }
    let j = left.generator().range_hull();
    let inner = window.shrink(BASE_FRACTION);
    let (a, b) = (left.generator().eval(inner.lo())?, left.generator().eval(inner.hi())?);
    let j_window = Interval::new(a.min(b), a.max(b))?;
    Ok(ReducedSystem {
        left: left.clone(),
        right: right.clone(),
        j,
        window,
        j_window,
    })
}

impl ReducedSystem {
    pub fn left(&self) -> &MeanSpec {
        &self.left
    }

    pub fn right(&self) -> &MeanSpec {
        &self.right
    }

    pub fn arity(&self) -> usize {
        self.left.arity()
    }

    /// `J = f(I)`.
    pub fn j(&self) -> Interval {
        self.j
    }

    /// The subinterval of `I` the diagnostics sample.
    pub fn window(&self) -> Interval {
        self.window
    }

    /// Bounded image of the sampling window; all diagnostic points lie in it.
    pub fn j_window(&self) -> Interval {
        self.j_window
    }

    /// Chebyshev base points over the centered part of the `J` window.
    pub fn base_points(&self, count: usize) -> Vec<f64> {
        let w = self.j_window.shrink(BASE_FRACTION);
        chebyshev_nodes(w.lo(), w.hi(), count)
    }

    pub fn default_radius(&self) -> f64 {
        RADIUS_FRACTION * self.j_window.length()
    }

    /// `f⁻¹(u)`.
    pub fn x_of(&self, u: f64) -> Result<f64> {
        self.left.inverse().eval(u)
    }

    pub fn h(&self, u: f64) -> Result<f64> {
        self.right.generator().eval(self.x_of(u)?)
    }

    pub fn dh(&self, u: f64) -> Result<f64> {
        let x = self.x_of(u)?;
        Ok(self.right.generator().derivative(x)? / self.left.generator().derivative(x)?)
    }

    pub fn r(&self, u: f64) -> Result<f64> {
        let x = self.x_of(u)?;
        Ok(self.right.weights().total(x)? / self.left.weights().total(x)?)
    }

    pub fn dr(&self, u: f64) -> Result<f64> {
        Ok(self.point(u)?.dr)
    }

    pub fn point(&self, u: f64) -> Result<ReducedPoint> {
        let x = self.x_of(u)?;
        let df = self.left.generator().derivative(x)?;
        if df == 0.0 {
            return Err(Error::domain(format!("generator has a vanishing derivative at {x}")));
        }
        let n = self.arity();
        let (pw, qw) = (self.left.weights(), self.right.weights());
        let mut p = Vec::with_capacity(n);
        let mut dp = Vec::with_capacity(n);
        let mut q = Vec::with_capacity(n);
        let mut dq = Vec::with_capacity(n);
        for i in 0..n {
            p.push(pw.value(i, x)?);
            dp.push(pw.derivative(i, x)? / df);
            q.push(qw.value(i, x)?);
            dq.push(qw.derivative(i, x)? / df);
        }
        let (p0, q0): (f64, f64) = (p.iter().sum(), q.iter().sum());
        let (dp0, dq0): (f64, f64) = (dp.iter().sum(), dq.iter().sum());
        let g = self.right.generator();
        Ok(ReducedPoint {
            u,
            x,
            h: g.eval(x)?,
            dh: g.derivative(x)? / df,
            r: q0 / p0,
            dr: (dq0 * p0 - q0 * dp0) / (p0 * p0),
            p,
            dp,
            q,
            dq,
        })
    }
}
