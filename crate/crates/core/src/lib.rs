//! Generalized Bajraktarević means.
//!
//! A mean is built from a strictly monotone generator `f` on an open interval
//! `I` and positive weight functions `p_1, ..., p_n`:
//!
//! ```text
//! A(x) = f⁽⁻¹⁾( Σ p_i(x_i) f(x_i) / Σ p_i(x_i) )
//! ```
//!
//! where `f⁽⁻¹⁾` is the generalized left inverse, so generators with jump
//! discontinuities are allowed. The [`equality`] module decides numerically
//! whether two such means coincide and recovers the Möbius parameters
//! `(a, b, c, d)` with `g = (af + b)/(cf + d)` and `q = (cf + d) p` when they do.

pub mod cli;
pub mod equality;
pub mod error;
pub mod means;
pub mod monotone_fn;
pub mod numerics;

pub use error::{Error, Result};
pub use means::{MeanSpec, WeightFamily};
pub use monotone_fn::{Expr, GeneralizedInverse, Interval, MonotoneFunction};
