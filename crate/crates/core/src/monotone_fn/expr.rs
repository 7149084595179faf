//! Expression trees for generators and weight functions.
//!
//! Every node is a univariate function of its input `u`. Nodes without an
//! `inner` field (`power`, `exp`, `log`, `reciprocal`) act on `u` directly;
//! nesting goes through `compose` or the `inner` argument of `affine` and
//! `moebius`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ownership {
    Left,
    #[default]
    Right,
}

/// Side from which a limit is approached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Approach {
    FromBelow,
    FromAbove,
    /// The argument is exactly at the point (constant inner node).
    Exact,
}

impl Approach {
    fn flipped_by(self, sign: Option<i8>) -> Approach {
        match (self, sign) {
            (Approach::Exact, _) | (_, Some(0)) | (_, None) => Approach::Exact,
            (a, Some(s)) if s > 0 => a,
            (Approach::FromBelow, _) => Approach::FromAbove,
            (Approach::FromAbove, _) => Approach::FromBelow,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piecewise {
    pub breakpoints: Vec<f64>,
    pub branches: Vec<Expr>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ownership: Vec<Ownership>,
}

impl Piecewise {
    pub fn owner(&self, k: usize) -> Ownership {
        self.ownership.get(k).copied().unwrap_or_default()
    }

    /// Index of the branch owning `u`.
    pub fn locate(&self, u: f64) -> usize {
        let idx = self.breakpoints.partition_point(|&b| b < u);
        if idx < self.breakpoints.len() && self.breakpoints[idx] == u {
            match self.owner(idx) {
                Ownership::Left => idx,
                Ownership::Right => idx + 1,
            }
        } else {
            idx
        }
    }

    fn validate(&self) -> Result<()> {
        if self.branches.len() != self.breakpoints.len() + 1 {
            return Err(Error::domain(format!(
                "piecewise node has {} breakpoints but {} branches",
                self.breakpoints.len(),
                self.branches.len()
            )));
        }
        if !self.ownership.is_empty() && self.ownership.len() != self.breakpoints.len() {
            return Err(Error::domain("ownership must list one entry per breakpoint"));
        }
        if self.breakpoints.iter().any(|b| !b.is_finite()) || self.breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("breakpoints must be finite and strictly increasing"));
        }
        self.branches.iter().try_for_each(Expr::validate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Expr {
    Identity,
    Const {
        value: f64,
    },
    /// `alpha * inner + beta`
    Affine {
        alpha: f64,
        beta: f64,
        inner: Box<Expr>,
    },
    /// `u^exponent` for `u > 0`
    Power {
        exponent: f64,
    },
    Exp,
    Log,
    Reciprocal,
    /// `(a * inner + b) / (c * inner + d)`
    Moebius {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        inner: Box<Expr>,
    },
    Compose {
        outer: Box<Expr>,
        inner: Box<Expr>,
    },
    Sum {
        terms: Vec<Expr>,
    },
    Product {
        factors: Vec<Expr>,
    },
    Piecewise(Piecewise),
}

impl Expr {
    pub fn identity() -> Self {
        Expr::Identity
    }

    pub fn constant(value: f64) -> Self {
        Expr::Const { value }
    }

    pub fn affine(alpha: f64, beta: f64, inner: Expr) -> Self {
        Expr::Affine {
            alpha,
            beta,
            inner: Box::new(inner),
        }
    }

    pub fn power(exponent: f64) -> Self {
        Expr::Power { exponent }
    }

    pub fn moebius(a: f64, b: f64, c: f64, d: f64, inner: Expr) -> Self {
        Expr::Moebius {
            a,
            b,
            c,
            d,
            inner: Box::new(inner),
        }
    }

    pub fn compose(outer: Expr, inner: Expr) -> Self {
        Expr::Compose {
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    pub fn sum(terms: Vec<Expr>) -> Self {
        Expr::Sum { terms }
    }

    pub fn product(factors: Vec<Expr>) -> Self {
        Expr::Product { factors }
    }

    pub fn piecewise(breakpoints: Vec<f64>, branches: Vec<Expr>, ownership: Vec<Ownership>) -> Self {
        Expr::Piecewise(Piecewise {
            breakpoints,
            branches,
            ownership,
        })
    }

    /// Structural parameter checks (no evaluation).
    pub fn validate(&self) -> Result<()> {
        match self {
            Expr::Identity | Expr::Exp | Expr::Log | Expr::Reciprocal => Ok(()),
            Expr::Const { value } if value.is_finite() => Ok(()),
            Expr::Const { value } => Err(Error::domain(format!("constant {value} is not finite"))),
            Expr::Affine { alpha, beta, inner } => {
                if *alpha == 0.0 || !alpha.is_finite() || !beta.is_finite() {
                    return Err(Error::domain(format!("affine node needs finite alpha != 0, got {alpha}")));
                }
                inner.validate()
            }
            Expr::Power { exponent } => {
                if *exponent == 0.0 || !exponent.is_finite() {
                    return Err(Error::domain(format!("power exponent must be finite and nonzero, got {exponent}")));
                }
                Ok(())
            }
            Expr::Moebius { a, b, c, d, inner } => {
                let det = a * d - b * c;
                let scale = (a * d).abs().max((b * c).abs()).max(1.0);
                if !det.is_finite() || det.abs() <= 1e-12 * scale {
                    return Err(Error::DegenerateParams(det));
                }
                inner.validate()
            }
            Expr::Compose { outer, inner } => {
                outer.validate()?;
                inner.validate()
            }
            Expr::Sum { terms: items } | Expr::Product { factors: items } => {
                if items.is_empty() {
                    return Err(Error::domain("sum/product needs at least one operand"));
                }
                items.iter().try_for_each(Expr::validate)
            }
            Expr::Piecewise(pw) => pw.validate(),
        }
    }

    /// Value at `u`; NaN or infinite outside the node's natural domain.
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Expr::Identity => u,
            Expr::Const { value } => *value,
            Expr::Affine { alpha, beta, inner } => alpha * inner.eval(u) + beta,
            Expr::Power { exponent } => {
                if u > 0.0 {
                    u.powf(*exponent)
                } else {
                    f64::NAN
                }
            }
            Expr::Exp => u.exp(),
            Expr::Log => {
                if u > 0.0 {
                    u.ln()
                } else {
                    f64::NAN
                }
            }
            Expr::Reciprocal => 1.0 / u,
            Expr::Moebius { a, b, c, d, inner } => {
                let v = inner.eval(u);
                (a * v + b) / (c * v + d)
            }
            Expr::Compose { outer, inner } => outer.eval(inner.eval(u)),
            Expr::Sum { terms } => terms.iter().map(|t| t.eval(u)).sum(),
            Expr::Product { factors } => factors.iter().map(|t| t.eval(u)).product(),
            Expr::Piecewise(pw) => pw.branches[pw.locate(u)].eval(u),
        }
    }

    /// Closed-form derivative by the node-wise chain rule.
    pub fn derivative(&self, u: f64) -> Result<f64> {
        Ok(match self {
            Expr::Identity => 1.0,
            Expr::Const { .. } => 0.0,
            Expr::Affine { alpha, inner, .. } => alpha * inner.derivative(u)?,
            Expr::Power { exponent } => {
                if u > 0.0 {
                    exponent * u.powf(exponent - 1.0)
                } else {
                    f64::NAN
                }
            }
            Expr::Exp => u.exp(),
            Expr::Log => {
                if u > 0.0 {
                    1.0 / u
                } else {
                    f64::NAN
                }
            }
            Expr::Reciprocal => -1.0 / (u * u),
            Expr::Moebius { a, b, c, d, inner } => {
                let v = inner.eval(u);
                let den = c * v + d;
                (a * d - b * c) / (den * den) * inner.derivative(u)?
            }
            Expr::Compose { outer, inner } => outer.derivative(inner.eval(u))? * inner.derivative(u)?,
            Expr::Sum { terms } => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.derivative(u)?;
                }
                acc
            }
            Expr::Product { factors } => {
                let values: Vec<f64> = factors.iter().map(|t| t.eval(u)).collect();
                let mut acc = 0.0;
                for (k, t) in factors.iter().enumerate() {
                    let others: f64 = values
                        .iter()
                        .enumerate()
                        .filter(|&(m, _)| m != k)
                        .map(|(_, v)| v)
                        .product();
                    acc += t.derivative(u)? * others;
                }
                acc
            }
            Expr::Piecewise(pw) => {
                if pw.breakpoints.contains(&u) {
                    return Err(Error::NotDifferentiable(u));
                }
                pw.branches[pw.locate(u)].derivative(u)?
            }
        })
    }

    /// Structural monotonicity sign: `Some(1)` increasing, `Some(-1)`
    /// decreasing, `Some(0)` constant, `None` when the structure does not
    /// determine it.
    pub fn monotone_sign(&self) -> Option<i8> {
        match self {
            Expr::Identity | Expr::Exp | Expr::Log => Some(1),
            Expr::Const { .. } => Some(0),
            Expr::Reciprocal => Some(-1),
            Expr::Power { exponent } => Some(if *exponent > 0.0 { 1 } else { -1 }),
            Expr::Affine { alpha, inner, .. } => inner.monotone_sign().map(|s| if *alpha > 0.0 { s } else { -s }),
            Expr::Moebius { a, b, c, d, inner } => {
                let det = a * d - b * c;
                inner.monotone_sign().map(|s| if det > 0.0 { s } else { -s })
            }
            Expr::Compose { outer, inner } => Some(outer.monotone_sign()? * inner.monotone_sign()?),
            Expr::Sum { .. } | Expr::Product { .. } | Expr::Piecewise(_) => None,
        }
    }

    /// One-sided limit at `x` (which may be infinite).
    ///
    /// Poles are resolved to signed infinities using the approach side and
    /// the structural monotonicity of inner nodes; when that is unknown the
    /// result is NaN.
    pub fn limit(&self, x: f64, side: Approach) -> f64 {
        match self {
            Expr::Identity => x,
            Expr::Const { value } => *value,
            Expr::Affine { alpha, beta, inner } => alpha * inner.limit(x, side) + beta,
            Expr::Power { exponent } => {
                if x >= 0.0 {
                    x.powf(*exponent)
                } else {
                    f64::NAN
                }
            }
            Expr::Exp => x.exp(),
            Expr::Log => {
                if x >= 0.0 {
                    x.ln()
                } else {
                    f64::NAN
                }
            }
            Expr::Reciprocal => pole_limit(1.0, x, side),
            Expr::Moebius { a, b, c, d, inner } => {
                let v = inner.limit(x, side);
                let inner_side = side.flipped_by(inner.monotone_sign());
                if v.is_infinite() {
                    if *c != 0.0 {
                        a / c
                    } else {
                        a / d * v
                    }
                } else {
                    let den = c * v + d;
                    if den == 0.0 {
                        let num = a * v + b;
                        // den ~ c * (w - v), approached from inner_side
                        let den_side = inner_side.flipped_by(Some(if *c > 0.0 { 1 } else { -1 }));
                        pole_limit(num, 0.0, den_side)
                    } else {
                        (a * v + b) / den
                    }
                }
            }
            Expr::Compose { outer, inner } => {
                let v = inner.limit(x, side);
                outer.limit(v, side.flipped_by(inner.monotone_sign()))
            }
            Expr::Sum { terms } => terms.iter().map(|t| t.limit(x, side)).sum(),
            Expr::Product { factors } => factors.iter().map(|t| t.limit(x, side)).product(),
            Expr::Piecewise(pw) => {
                let idx = pw.breakpoints.partition_point(|&b| b < x);
                let branch = if idx < pw.breakpoints.len() && pw.breakpoints[idx] == x {
                    match side {
                        Approach::FromBelow => idx,
                        Approach::FromAbove => idx + 1,
                        Approach::Exact => pw.locate(x),
                    }
                } else {
                    idx
                };
                pw.branches[branch].limit(x, side)
            }
        }
    }

    /// Closed-form inverse value, when the node has one.
    pub fn inverse(&self, y: f64) -> Option<f64> {
        let x = match self {
            Expr::Identity => y,
            Expr::Const { .. } | Expr::Sum { .. } | Expr::Product { .. } | Expr::Piecewise(_) => return None,
            Expr::Affine { alpha, beta, inner } => return inner.inverse((y - beta) / alpha),
            Expr::Power { exponent } => {
                if y > 0.0 {
                    y.powf(1.0 / exponent)
                } else {
                    return None;
                }
            }
            Expr::Exp => {
                if y > 0.0 {
                    y.ln()
                } else {
                    return None;
                }
            }
            Expr::Log => y.exp(),
            Expr::Reciprocal => 1.0 / y,
            Expr::Moebius { a, b, c, d, inner } => {
                let den = a - c * y;
                if den == 0.0 {
                    return None;
                }
                return inner.inverse((d * y - b) / den);
            }
            Expr::Compose { outer, inner } => return outer.inverse(y).and_then(|v| inner.inverse(v)),
        };
        x.is_finite().then_some(x)
    }

    pub fn contains_piecewise(&self) -> bool {
        match self {
            Expr::Piecewise(_) => true,
            Expr::Affine { inner, .. } | Expr::Moebius { inner, .. } => inner.contains_piecewise(),
            Expr::Compose { outer, inner } => outer.contains_piecewise() || inner.contains_piecewise(),
            Expr::Sum { terms: items } | Expr::Product { factors: items } => items.iter().any(Expr::contains_piecewise),
            _ => false,
        }
    }

    /// Applies `map` to every top-level branch, keeping breakpoints and
    /// ownership; a non-piecewise node is its own single branch.
    pub fn map_branches(&self, map: impl Fn(&Expr) -> Expr) -> Expr {
        match self {
            Expr::Piecewise(pw) => Expr::Piecewise(Piecewise {
                breakpoints: pw.breakpoints.clone(),
                branches: pw.branches.iter().map(map).collect(),
                ownership: pw.ownership.clone(),
            }),
            other => map(other),
        }
    }
}

/// Limit of `num / w` as `w -> x` from `side`.
fn pole_limit(num: f64, x: f64, side: Approach) -> f64 {
    if x != 0.0 {
        return num / x;
    }
    match side {
        Approach::FromAbove => num * f64::INFINITY,
        Approach::FromBelow => -num * f64::INFINITY,
        Approach::Exact => f64::NAN,
    }
}
