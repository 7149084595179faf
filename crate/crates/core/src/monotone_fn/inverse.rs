use std::cmp::Ordering;
use std::sync::Arc;

use super::function::{MonotoneFunction, Piece};
use super::interval::Interval;
use crate::error::{Error, Result};
use crate::numerics::{bisect, BisectionConfig};

/// Iteration cap of the bisection fallback, enough to walk from the widest
/// finite bracket down to adjacent floats.
const INVERSE_BISECTION_MAX_ITER: usize = 2200;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Segment {
    /// Values taken by the continuous branch of piece `index`.
    Branch { index: usize, end: f64 },
    /// Gap of a jump at breakpoint `at`; the whole gap maps to `at`.
    Plateau { at: f64, end: f64 },
}

/// Generalized left inverse of a strictly monotone function: the continuous
/// monotone extension of its inverse to the convex hull of its range.
///
/// Segment ends are stored in direction-normalized coordinates (`s * y`,
/// where `s = +1` for increasing and `-1` for decreasing functions), so the
/// lookup is the same in both senses.
#[derive(Debug, Clone)]
pub struct GeneralizedInverse {
    source: Arc<MonotoneFunction>,
    hull: Interval,
    segments: Vec<Segment>,
}

impl GeneralizedInverse {
    pub fn new(source: Arc<MonotoneFunction>) -> Self {
        let s = source.direction().sign();
        let pieces = source.pieces();
        let mut segments = Vec::with_capacity(2 * pieces.len());
        for (index, w) in pieces.iter().enumerate() {
            segments.push(Segment::Branch {
                index,
                end: s * w.lim_hi,
            });
            if let Some(next) = pieces.get(index + 1) {
                if s * next.lim_lo > s * w.lim_hi {
                    segments.push(Segment::Plateau {
                        at: w.hi,
                        end: s * next.lim_lo,
                    });
                }
            }
        }
        let hull = source.range_hull();
        Self { source, hull, segments }
    }

    pub fn source(&self) -> &MonotoneFunction {
        &self.source
    }

    pub fn range_hull(&self) -> Interval {
        self.hull
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        if !self.hull.contains(y) {
            return Err(Error::Range {
                y,
                lo: self.hull.lo(),
                hi: self.hull.hi(),
            });
        }
        let key = self.source.direction().sign() * y;
        let last_piece = self.source.pieces().len() - 1;
        for seg in &self.segments {
            match *seg {
                Segment::Branch { index, end } => {
                    if key < end {
                        return self.invert_piece(index, y);
                    }
                    if key == end && index < last_piece {
                        return Ok(self.source.pieces()[index].hi);
                    }
                }
                Segment::Plateau { at, end } => {
                    if key <= end {
                        return Ok(at);
                    }
                }
            }
        }
        // key is below the hull's upper end, so the last branch owns it
        self.invert_piece(last_piece, y)
    }

    fn invert_piece(&self, index: usize, y: f64) -> Result<f64> {
        let piece = &self.source.pieces()[index];
        if let Some(x) = piece.branch.inverse(y) {
            let slack = 1e-12 * (1.0 + x.abs());
            if x >= piece.lo - slack && x <= piece.hi + slack {
                return Ok(x.clamp(next_up(piece.lo), next_down(piece.hi)));
            }
        }
        self.bisect_piece(piece, y)
    }

    fn bisect_piece(&self, piece: &Piece, y: f64) -> Result<f64> {
        let s = self.source.direction().sign();
        let sign_at = |x: f64| -> Ordering {
            if x <= piece.lo {
                return Ordering::Less;
            }
            if x >= piece.hi {
                return Ordering::Greater;
            }
            let v = s * (piece.branch.eval(x) - y);
            if v.is_nan() {
                Ordering::Greater
            } else {
                v.partial_cmp(&0.0).unwrap()
            }
        };
        let (lo, hi) = finite_bracket(piece, &sign_at)?;
        // bisect until the bracket is two adjacent floats
        let cfg = BisectionConfig {
            tol_abs: f64::MIN_POSITIVE,
            max_iter: INVERSE_BISECTION_MAX_ITER,
        };
        Ok(bisect(sign_at, lo, hi, &cfg)?)
    }
}

fn finite_bracket(piece: &Piece, sign_at: &impl Fn(f64) -> Ordering) -> Result<(f64, f64)> {
    let window = Interval::new(piece.lo, piece.hi)?;
    let anchor = window.midpoint();
    let expand = |dir: f64, target: Ordering| -> Result<f64> {
        let mut step = anchor.abs().max(1.0);
        for _ in 0..2100 {
            let x = anchor + dir * step;
            if !x.is_finite() {
                break;
            }
            if sign_at(x) == target || sign_at(x) == Ordering::Equal {
                return Ok(x);
            }
            step *= 2.0;
        }
        Err(Error::domain("could not bracket the inverse on an unbounded piece"))
    };
    let lo = if piece.lo.is_finite() {
        piece.lo
    } else {
        expand(-1.0, Ordering::Less)?
    };
    let hi = if piece.hi.is_finite() {
        piece.hi
    } else {
        expand(1.0, Ordering::Greater)?
    };
    Ok((lo, hi))
}

fn next_up(x: f64) -> f64 {
    if x.is_finite() {
        x.next_up()
    } else {
        x
    }
}

fn next_down(x: f64) -> f64 {
    if x.is_finite() {
        x.next_down()
    } else {
        x
    }
}
