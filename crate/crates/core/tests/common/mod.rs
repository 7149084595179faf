//! Seeded random families of generators, weights and Möbius parameters.
#![allow(dead_code)]

use bmeans::equality::{canonical_transform, MoebiusParams};
use bmeans::monotone_fn::{Expr, Interval, Ownership};
use bmeans::{Error, MeanSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

pub fn lin(alpha: f64, beta: f64) -> Expr {
    Expr::affine(alpha, beta, Expr::identity())
}

fn signed(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let v = rng.gen_range(lo..hi);
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

/// A continuous strictly monotone generator together with a bounded domain.
pub fn continuous_generator(rng: &mut ChaCha8Rng) -> (Expr, Interval) {
    let lo = rng.gen_range(0.2..2.0);
    let pos = iv(lo, lo + rng.gen_range(0.5..4.0));
    let lo = rng.gen_range(-3.0..1.0);
    let any = iv(lo, lo + rng.gen_range(0.5..4.0));
    match rng.gen_range(0..10) {
        0 => (Expr::identity(), any),
        1 => (Expr::affine(signed(rng, 0.3, 3.0), rng.gen_range(-2.0..2.0), Expr::identity()), any),
        2 => (Expr::Exp, any),
        3 => (Expr::Log, pos),
        4 => {
            let p = [-2.0, -0.5, 0.5, 1.5, 3.0][rng.gen_range(0..5)];
            (Expr::power(p), pos)
        }
        5 => (Expr::Reciprocal, pos),
        6 => {
            // (u + b)/(cu + 1) with cu + 1 > 0 on the domain
            let c = rng.gen_range(-0.1..0.3);
            let b = rng.gen_range(-1.0..1.0);
            (Expr::moebius(1.0, b, c, 1.0, Expr::identity()), pos)
        }
        7 => (Expr::compose(Expr::Exp, lin(signed(rng, 0.2, 1.0), 0.0)), any),
        8 => (Expr::compose(Expr::Log, Expr::affine(1.0, 1.0, Expr::Exp)), any),
        _ => (Expr::sum(vec![Expr::identity(), Expr::Exp]), any),
    }
}

/// A generator with one or two jumps in its monotone direction.
pub fn jump_generator(rng: &mut ChaCha8Rng) -> (Expr, Interval) {
    let lo = rng.gen_range(0.2..1.0);
    let dom = iv(lo, lo + rng.gen_range(1.0..3.0));
    let b1 = dom.lo() + 0.3 * dom.length() * rng.gen_range(0.5..1.5);
    let b2 = dom.lo() + 0.7 * dom.length();
    let own = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { Ownership::Left } else { Ownership::Right };
    let (j1, j2) = (rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0));
    let e = match rng.gen_range(0..4) {
        0 => Expr::piecewise(vec![b1], vec![Expr::identity(), lin(1.0, j1)], vec![own(rng)]),
        1 => Expr::piecewise(
            vec![b1, b2],
            vec![Expr::Log, Expr::affine(1.0, j1, Expr::Log), Expr::affine(1.0, j1 + j2, Expr::Log)],
            vec![own(rng), own(rng)],
        ),
        2 => Expr::piecewise(
            vec![b1],
            vec![Expr::Reciprocal, Expr::affine(1.0, -j1, Expr::Reciprocal)],
            vec![own(rng)],
        ),
        _ => Expr::piecewise(vec![b1], vec![Expr::Exp, Expr::affine(2.0, j1, Expr::Exp)], vec![own(rng)]),
    };
    (e, dom)
}

/// A weight that stays positive on `dom`.
pub fn weight(rng: &mut ChaCha8Rng, dom: Interval) -> Expr {
    match rng.gen_range(0..4) {
        0 => Expr::constant(rng.gen_range(0.2..3.0)),
        1 => {
            let alpha = signed(rng, 0.1, 2.0);
            let low = alpha.min(0.0) * dom.hi() + alpha.max(0.0) * dom.lo();
            Expr::affine(alpha, rng.gen_range(0.1..2.0) - low, Expr::identity())
        }
        2 => Expr::compose(Expr::Exp, lin(rng.gen_range(-1.0..1.0), 0.0)),
        _ => Expr::product(vec![
            Expr::constant(rng.gen_range(0.5..2.0)),
            Expr::compose(Expr::Exp, lin(rng.gen_range(-0.5..0.5), 0.0)),
        ]),
    }
}

pub fn weights(rng: &mut ChaCha8Rng, dom: Interval, n: usize) -> Vec<Expr> {
    (0..n).map(|_| weight(rng, dom)).collect()
}

pub fn tuple(rng: &mut ChaCha8Rng, dom: Interval, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| dom.lo() + dom.length() * rng.gen_range(0.001..0.999))
        .collect()
}

pub fn continuous_mean(rng: &mut ChaCha8Rng, n: usize) -> MeanSpec {
    let (g, dom) = continuous_generator(rng);
    MeanSpec::from_exprs(g, weights(rng, dom, n), dom).unwrap()
}

pub fn jump_mean(rng: &mut ChaCha8Rng, n: usize) -> MeanSpec {
    let (g, dom) = jump_generator(rng);
    MeanSpec::from_exprs(g, weights(rng, dom, n), dom).unwrap()
}

/// A draw `(m, θ, canonical_transform(m, θ))` with `|ad - bc| >= 0.1` and
/// `cf + d` between 0.2 and 4 on the range of `f`.
pub struct CanonicalDraw {
    pub left: MeanSpec,
    pub params: MoebiusParams,
    pub right: MeanSpec,
}

pub fn canonical_draw(rng: &mut ChaCha8Rng, n: usize) -> CanonicalDraw {
    loop {
        let left = continuous_mean(rng, n);
        let hull = left.generator().range_hull();
        let scale = hull.lo().abs().max(hull.hi().abs());
        let c = rng.gen_range(-1.0..1.0) / scale;
        let d = rng.gen_range(1.2..3.0);
        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let Ok(params) = MoebiusParams::new(a, b, c, d) else { continue };
        if params.det().abs() < 0.1 {
            continue;
        }
        match canonical_transform(&left, &params) {
            Ok(right) => return CanonicalDraw { left, params, right },
            Err(Error::SignViolation { .. }) => continue,
            Err(e) => panic!("unexpected error: {e}"),
        }
    }
}
