//! Strictly monotone generators on open intervals and their generalized
//! left inverses.

mod expr;
mod function;
mod interval;
mod inverse;

pub use expr::{Approach, Expr, Ownership, Piecewise};
pub use function::{Direction, MonotoneFunction, Piece, DEFAULT_SAMPLES_PER_PIECE};
pub use interval::Interval;
pub use inverse::GeneralizedInverse;
