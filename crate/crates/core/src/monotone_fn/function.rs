use serde::Serialize;

use super::expr::{Approach, Expr, Ownership, Piecewise};
use super::interval::Interval;
use crate::error::{Error, Result};

pub const DEFAULT_SAMPLES_PER_PIECE: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Increasing => 1.0,
            Direction::Decreasing => -1.0,
        }
    }
}

/// One continuous branch of a monotone function together with its
/// one-sided limits at the ends of its subinterval.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub branch: Expr,
    pub lim_lo: f64,
    pub lim_hi: f64,
}

/// A strictly monotone function on an open interval, possibly with finitely
/// many jump discontinuities.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneFunction {
    domain: Interval,
    expr: Expr,
    direction: Direction,
    pieces: Vec<Piece>,
    breakpoints: Vec<f64>,
}

impl MonotoneFunction {
    pub fn new(expr: Expr, domain: Interval) -> Result<Self> {
        Self::with_samples(expr, domain, DEFAULT_SAMPLES_PER_PIECE)
    }

    /// Builds the function and verifies strict monotonicity by sampling
    /// `samples` points per piece plus the one-sided limits at breakpoints.
    pub fn with_samples(expr: Expr, domain: Interval, samples: usize) -> Result<Self> {
        expr.validate()?;
        let (breakpoints, branches): (Vec<f64>, Vec<Expr>) = match &expr {
            Expr::Piecewise(Piecewise {
                breakpoints, branches, ..
            }) => (breakpoints.clone(), branches.clone()),
            other => (Vec::new(), vec![other.clone()]),
        };
        if branches.iter().any(Expr::contains_piecewise) {
            return Err(Error::domain("piecewise nodes must be the outermost node of a generator"));
        }
        if let Some(b) = breakpoints.iter().find(|b| !domain.contains(**b)) {
            return Err(Error::domain(format!("breakpoint {b} lies outside {domain}")));
        }

        let mut edges = Vec::with_capacity(breakpoints.len() + 2);
        edges.push(domain.lo());
        edges.extend_from_slice(&breakpoints);
        edges.push(domain.hi());

        let mut pieces = Vec::with_capacity(branches.len());
        for (k, branch) in branches.into_iter().enumerate() {
            let (lo, hi) = (edges[k], edges[k + 1]);
            let lim_lo = branch.limit(lo, Approach::FromAbove);
            let lim_hi = branch.limit(hi, Approach::FromBelow);
            if lim_lo.is_nan() || lim_hi.is_nan() {
                return Err(Error::domain(format!("cannot determine the limits of piece {k} on ({lo}, {hi})")));
            }
            let interior_breakpoint = |x: f64, v: f64| (x.is_finite() && x != domain.lo() && x != domain.hi()) && !v.is_finite();
            if interior_breakpoint(lo, lim_lo) || interior_breakpoint(hi, lim_hi) {
                return Err(Error::domain(format!("piece {k} is unbounded at a breakpoint")));
            }
            pieces.push(Piece {
                lo,
                hi,
                branch,
                lim_lo,
                lim_hi,
            });
        }

        let direction = sample_direction(&pieces, samples)?;
        let s = direction.sign();
        for w in pieces.windows(2) {
            let (left, right) = (&w[0], &w[1]);
            if s * left.lim_hi > s * right.lim_lo {
                return Err(Error::NotMonotone {
                    x1: left.hi,
                    y1: left.lim_hi,
                    x2: right.lo,
                    y2: right.lim_lo,
                });
            }
        }

        Ok(Self {
            domain,
            expr,
            direction,
            pieces,
            breakpoints,
        })
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn ownership(&self, k: usize) -> Ownership {
        match &self.expr {
            Expr::Piecewise(pw) => pw.owner(k),
            _ => Ownership::Right,
        }
    }

    /// Breakpoints where the one-sided limits differ.
    pub fn jumps(&self) -> Vec<f64> {
        self.pieces
            .windows(2)
            .filter(|w| w[0].lim_hi != w[1].lim_lo)
            .map(|w| w[0].hi)
            .collect()
    }

    pub fn is_continuous(&self) -> bool {
        self.jumps().is_empty()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::domain(format!("{x} is outside the domain {}", self.domain)));
        }
        let v = self.expr.eval(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(format!("generator is undefined at {x}")))
        }
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::domain(format!("{x} is outside the domain {}", self.domain)));
        }
        if self.breakpoints.contains(&x) {
            return Err(Error::NotDifferentiable(x));
        }
        let d = self.expr.derivative(x)?;
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::domain(format!("derivative is undefined at {x}")))
        }
    }

    /// Open convex hull of the range, `conv(f(I))`.
    pub fn range_hull(&self) -> Interval {
        let first = self.pieces.first().expect("at least one piece").lim_lo;
        let last = self.pieces.last().expect("at least one piece").lim_hi;
        let (lo, hi) = if first < last { (first, last) } else { (last, first) };
        Interval::new(lo, hi).expect("strictly monotone function has a nondegenerate range")
    }
}

fn sample_direction(pieces: &[Piece], samples: usize) -> Result<Direction> {
    let mut direction: Option<Direction> = None;
    for piece in pieces {
        let sub = Interval::new(piece.lo, piece.hi)?;
        let xs = sub.sample_points(samples.max(2));
        let mut prev: Option<(f64, f64)> = None;
        for x in xs {
            let y = piece.branch.eval(x);
            if !y.is_finite() {
                return Err(Error::domain(format!("expression is undefined at {x}")));
            }
            if let Some((px, py)) = prev {
                let here = if y > py {
                    Direction::Increasing
                } else if y < py {
                    Direction::Decreasing
                } else {
                    return Err(Error::NotMonotone {
                        x1: px,
                        y1: py,
                        x2: x,
                        y2: y,
                    });
                };
                match direction {
                    None => direction = Some(here),
                    Some(d) if d != here => {
                        return Err(Error::NotMonotone {
                            x1: px,
                            y1: py,
                            x2: x,
                            y2: y,
                        })
                    }
                    _ => {}
                }
            }
            prev = Some((x, y));
        }
    }
    direction.ok_or_else(|| Error::domain("could not determine monotone direction"))
}
