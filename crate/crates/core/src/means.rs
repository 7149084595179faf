//! n-variable generalized Bajraktarević means and their evaluators.
//!
//! Three independent evaluators are provided: the direct formula through the
//! generalized inverse, bisection on the sign pattern of
//! `S(z) = Σ p_i(x_i) (f(z) - f(x_i))`, and a value-based root solve of
//! `S(y) = 0` for continuous generators.

use std::cmp::Ordering;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::monotone_fn::{Direction, Expr, GeneralizedInverse, Interval, MonotoneFunction};
use crate::numerics::{bisect, bisect_root, central_diff, BisectionConfig};

pub const DEFAULT_TOL: f64 = 1e-12;
const WEIGHT_SAMPLES: usize = 1024;

/// Positive weight functions `p_1, ..., p_n` (n ≥ 2) on a shared interval.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFamily {
    domain: Interval,
    weights: Vec<Expr>,
}

impl WeightFamily {
    /// Checks every weight for positivity on 1024 sample points.
    pub fn new(weights: Vec<Expr>, domain: Interval) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::domain(format!("a weight family needs at least two weights, got {}", weights.len())));
        }
        let samples = domain.sample_points(WEIGHT_SAMPLES);
        for (i, w) in weights.iter().enumerate() {
            w.validate()?;
            for &x in &samples {
                let v = w.eval(x);
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::domain(format!("weight {i} is not positive at {x} (value {v})")));
                }
            }
        }
        Ok(Self { domain, weights })
    }

    /// `n` copies of the constant weight 1.
    pub fn unit(n: usize, domain: Interval) -> Result<Self> {
        Self::new(vec![Expr::constant(1.0); n], domain)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn exprs(&self) -> &[Expr] {
        &self.weights
    }

    /// `p_i(x)`, revalidating positivity at the evaluation point.
    pub fn value(&self, i: usize, x: f64) -> Result<f64> {
        let w = self
            .weights
            .get(i)
            .ok_or_else(|| Error::BadIndices(format!("weight index {i} out of range")))?;
        let v = w.eval(x);
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::domain(format!("weight {i} is not positive at {x} (value {v})")))
        }
    }

    pub fn derivative(&self, i: usize, x: f64) -> Result<f64> {
        let w = self
            .weights
            .get(i)
            .ok_or_else(|| Error::BadIndices(format!("weight index {i} out of range")))?;
        let d = w.derivative(x)?;
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::domain(format!("weight {i} is not differentiable at {x}")))
        }
    }

    /// `p_0 = p_1 + ... + p_n` at a single point.
    pub fn total(&self, x: f64) -> Result<f64> {
        (0..self.len()).map(|i| self.value(i, x)).sum()
    }
}

/// The mean `A_{f,p}`: a generator, its weights and the cached inverse.
#[derive(Debug, Clone)]
pub struct MeanSpec {
    generator: Arc<MonotoneFunction>,
    weights: WeightFamily,
    inverse: GeneralizedInverse,
}

impl MeanSpec {
    pub fn new(generator: MonotoneFunction, weights: WeightFamily) -> Result<Self> {
        Self::from_shared(Arc::new(generator), weights)
    }

    pub fn from_shared(generator: Arc<MonotoneFunction>, weights: WeightFamily) -> Result<Self> {
        if generator.domain() != weights.domain() {
            return Err(Error::domain(format!(
                "generator domain {} differs from weight domain {}",
                generator.domain(),
                weights.domain()
            )));
        }
        let inverse = GeneralizedInverse::new(generator.clone());
        Ok(Self {
            generator,
            weights,
            inverse,
        })
    }

    /// Convenience constructor from expressions.
    pub fn from_exprs(generator: Expr, weights: Vec<Expr>, domain: Interval) -> Result<Self> {
        Self::new(MonotoneFunction::new(generator, domain)?, WeightFamily::new(weights, domain)?)
    }

    pub fn arity(&self) -> usize {
        self.weights.len()
    }

    pub fn domain(&self) -> Interval {
        self.generator.domain()
    }

    pub fn generator(&self) -> &MonotoneFunction {
        &self.generator
    }

    pub fn shared_generator(&self) -> Arc<MonotoneFunction> {
        self.generator.clone()
    }

    pub fn weights(&self) -> &WeightFamily {
        &self.weights
    }

    pub fn inverse(&self) -> &GeneralizedInverse {
        &self.inverse
    }

    /// Same generator, different weights.
    pub fn with_weights(&self, weights: WeightFamily) -> Result<Self> {
        Self::from_shared(self.generator.clone(), weights)
    }

    fn check_tuple(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.arity() {
            return Err(Error::domain(format!(
                "tuple has {} coordinates, mean has arity {}",
                x.len(),
                self.arity()
            )));
        }
        let dom = self.domain();
        if let Some((i, xi)) = x.iter().enumerate().find(|(_, xi)| !dom.contains(**xi)) {
            return Err(Error::domain(format!("coordinate {i} = {xi} is outside {dom}")));
        }
        Ok(())
    }

    /// `(p_i(x_i), f(x_i))` per coordinate.
    fn terms(&self, x: &[f64]) -> Result<Vec<(f64, f64)>> {
        self.check_tuple(x)?;
        x.iter()
            .enumerate()
            .map(|(i, &xi)| Ok((self.weights.value(i, xi)?, self.generator.eval(xi)?)))
            .collect()
    }

    /// `R_{f,p}(x) = Σ p_i(x_i) f(x_i) / Σ p_i(x_i)`.
    pub fn weighted_generator_average(&self, x: &[f64]) -> Result<f64> {
        let terms = self.terms(x)?;
        let (num, den) = terms.iter().fold((0.0, 0.0), |(n, d), &(w, fx)| (n + w * fx, d + w));
        Ok(num / den)
    }

    /// `f⁽⁻¹⁾(R_{f,p}(x))`, clamped to `[min x, max x]`.
    pub fn mean_direct(&self, x: &[f64]) -> Result<f64> {
        let avg = self.weighted_generator_average(x)?;
        let (lo, hi) = min_max(x);
        if lo == hi {
            return Ok(lo);
        }
        let hull = self.inverse.range_hull();
        // rounding can push the average a hair past the hull
        let avg = avg.clamp(hull.lo().next_up(), hull.hi().next_down());
        Ok(self.inverse.eval(avg)?.clamp(lo, hi))
    }

    /// Bisection on the sign of `S(z)` over `[min x, max x]`.
    pub fn mean_by_sign_characterization(&self, x: &[f64], tol: f64) -> Result<f64> {
        let terms = self.terms(x)?;
        let (lo, hi) = min_max(x);
        if lo == hi {
            return Ok(lo);
        }
        let flip = match self.generator.direction() {
            Direction::Increasing => 1.0,
            Direction::Decreasing => -1.0,
        };
        let gen = &self.generator;
        let sign = |z: f64| -> Ordering {
            let fz = match gen.eval(z) {
                Ok(v) => v,
                Err(_) => return Ordering::Equal,
            };
            let s: f64 = terms.iter().map(|&(w, fx)| w * (fz - fx)).sum();
            (flip * s).partial_cmp(&0.0).unwrap_or(Ordering::Equal)
        };
        Ok(bisect(sign, lo, hi, &BisectionConfig::new(tol))?)
    }

    /// Unique root of `Σ p_i(x_i) (f(y) - f(x_i)) = 0`; continuous generators only.
    pub fn mean_by_root(&self, x: &[f64], tol: f64) -> Result<f64> {
        if let Some(&at) = self.generator.jumps().first() {
            return Err(Error::NotContinuous(at));
        }
        let terms = self.terms(x)?;
        let (lo, hi) = min_max(x);
        if lo == hi {
            return Ok(lo);
        }
        let gen = &self.generator;
        let residual = |y: f64| -> f64 {
            match gen.eval(y) {
                Ok(fy) => terms.iter().map(|&(w, fx)| w * (fy - fx)).sum(),
                Err(_) => f64::NAN,
            }
        };
        Ok(bisect_root(residual, lo, hi, &BisectionConfig::new(tol))?)
    }

    /// Central-difference estimate of `∂_i A` at the diagonal point `(t, ..., t)`.
    pub fn diagonal_partial(&self, i: usize, t: f64, h: f64) -> Result<f64> {
        if i >= self.arity() {
            return Err(Error::BadIndices(format!("index {i} out of range for arity {}", self.arity())));
        }
        let dom = self.domain();
        if !(h > 0.0 && dom.contains(t - h) && dom.contains(t + h)) {
            return Err(Error::domain(format!("[{}, {}] is not inside {dom}", t - h, t + h)));
        }
        let section = self.diagonal_section(i, t);
        Ok(central_diff(section, t, h)?)
    }

    /// `s ↦ A(t, ..., s, ..., t)` with `s` in slot `i`; NaN where evaluation fails.
    pub fn diagonal_section(&self, i: usize, t: f64) -> impl Fn(f64) -> f64 + '_ {
        let n = self.arity();
        move |s: f64| {
            let mut x = vec![t; n];
            x[i] = s;
            self.mean_direct(&x).unwrap_or(f64::NAN)
        }
    }

    /// The k-variable mean on the weights selected by strictly increasing `indices`.
    pub fn restrict(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::BadIndices("index list is empty".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadIndices(format!("{indices:?} is not strictly increasing")));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.arity()) {
            return Err(Error::BadIndices(format!("index {bad} out of range for arity {}", self.arity())));
        }
        let weights = indices.iter().map(|&i| self.weights.weights[i].clone()).collect();
        let family = WeightFamily {
            domain: self.weights.domain,
            weights,
        };
        self.with_weights(family)
    }
}

fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone_fn::Ownership;
    use crate::numerics::{default_step, richardson};
    use proptest::prelude::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn arithmetic(dom: Interval, n: usize) -> MeanSpec {
        MeanSpec::new(
            MonotoneFunction::new(Expr::identity(), dom).unwrap(),
            WeightFamily::unit(n, dom).unwrap(),
        )
        .unwrap()
    }

    fn geometric(dom: Interval, n: usize) -> MeanSpec {
        MeanSpec::new(
            MonotoneFunction::new(Expr::Log, dom).unwrap(),
            WeightFamily::unit(n, dom).unwrap(),
        )
        .unwrap()
    }

    fn jump_mean() -> MeanSpec {
        let dom = iv(-1.0, 1.0);
        let e = Expr::piecewise(
            vec![0.0],
            vec![Expr::identity(), Expr::affine(1.0, 1.0, Expr::identity())],
            vec![Ownership::Right],
        );
        MeanSpec::from_exprs(e, vec![Expr::constant(1.0); 2], dom).unwrap()
    }

    #[test]
    fn weighted_average_examples() {
        let pos = iv(0.0, f64::INFINITY);
        assert_eq!(arithmetic(pos, 2).weighted_generator_average(&[1.0, 3.0]).unwrap(), 2.0);
        let lin = MeanSpec::from_exprs(Expr::identity(), vec![Expr::identity(); 2], pos).unwrap();
        assert!((lin.weighted_generator_average(&[1.0, 2.0]).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        let g = geometric(pos, 2).weighted_generator_average(&[1.0, 4.0]).unwrap();
        assert!((g - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn mean_direct_examples() {
        let pos = iv(0.0, f64::INFINITY);
        assert_eq!(arithmetic(pos, 2).mean_direct(&[1.0, 3.0]).unwrap(), 2.0);
        assert!((geometric(pos, 2).mean_direct(&[1.0, 4.0]).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(geometric(pos, 3).mean_direct(&[0.7, 0.7, 0.7]).unwrap(), 0.7);
    }

    #[test]
    fn tuple_errors_name_the_coordinate() {
        let m = arithmetic(iv(0.0, 1.0), 2);
        match m.mean_direct(&[0.5, 1.5]) {
            Err(Error::Domain(msg)) => assert!(msg.contains("coordinate 1"), "{msg}"),
            other => panic!("{other:?}"),
        }
        assert!(m.mean_direct(&[0.5]).is_err());
    }

    #[test]
    fn sign_characterization_examples() {
        let m = arithmetic(iv(-1.0, 2.0), 2);
        assert!((m.mean_by_sign_characterization(&[0.0, 1.0], 1e-12).unwrap() - 0.5).abs() <= 1e-12);
        let g = geometric(iv(0.0, f64::INFINITY), 2);
        assert!((g.mean_by_sign_characterization(&[1.0, 4.0], 1e-12).unwrap() - 2.0).abs() <= 1e-12);
        let j = jump_mean();
        let x = [-0.5, 0.5];
        let direct = j.mean_direct(&x).unwrap();
        let signed = j.mean_by_sign_characterization(&x, 1e-12).unwrap();
        assert!((direct - signed).abs() <= 1e-12 + 1e-12);
        // average of -0.5 and 1.5 is 0.5, inside the gap [0, 1] -> plateau at 0
        assert_eq!(direct, 0.0);
    }

    #[test]
    fn root_examples() {
        let m = arithmetic(iv(0.0, 10.0), 3);
        assert!((m.mean_by_root(&[2.0, 4.0, 6.0], 1e-12).unwrap() - 4.0).abs() <= 1e-12);
        let g = geometric(iv(0.0, f64::INFINITY), 2);
        assert!((g.mean_by_root(&[1.0, 4.0], 1e-12).unwrap() - 2.0).abs() <= 1e-12);
        let lin = MeanSpec::from_exprs(Expr::identity(), vec![Expr::identity(); 2], iv(0.0, 5.0)).unwrap();
        assert!((lin.mean_by_root(&[1.0, 2.0], 1e-12).unwrap() - 5.0 / 3.0).abs() <= 1e-12);
        assert!(matches!(
            jump_mean().mean_by_root(&[-0.5, 0.5], 1e-12),
            Err(Error::NotContinuous(_))
        ));
    }

    #[test]
    fn decreasing_generator_agrees_across_evaluators() {
        let dom = iv(0.0, f64::INFINITY);
        // harmonic-type mean
        let m = MeanSpec::from_exprs(Expr::Reciprocal, vec![Expr::constant(1.0), Expr::identity()], dom).unwrap();
        let x = [1.0, 3.0];
        // (1*1 + 3*(1/3)) / (1 + 3) = 1/2 -> inverse 2
        let direct = m.mean_direct(&x).unwrap();
        assert!((direct - 2.0).abs() < 1e-15);
        assert!((m.mean_by_sign_characterization(&x, 1e-12).unwrap() - direct).abs() <= 2e-12);
        assert!((m.mean_by_root(&x, 1e-12).unwrap() - direct).abs() <= 2e-12);
    }

    #[test]
    fn diagonal_partial_examples() {
        let dom = iv(0.0, 10.0);
        let unit = arithmetic(dom, 2);
        assert!((unit.diagonal_partial(0, 3.0, 1e-4).unwrap() - 0.5).abs() < 1e-8);
        let m = MeanSpec::from_exprs(Expr::identity(), vec![Expr::constant(1.0), Expr::identity()], dom).unwrap();
        let d = richardson(m.diagonal_section(0, 2.0), 2.0, default_step(2.0), 3).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-8, "{d}");
        let g = MeanSpec::from_exprs(Expr::Log, vec![Expr::identity(), Expr::constant(1.0)], dom).unwrap();
        let d = richardson(g.diagonal_section(0, 2.0), 2.0, default_step(2.0), 3).unwrap();
        assert!((d - 2.0 / 3.0).abs() < 1e-8, "{d}");
        assert!(m.diagonal_partial(0, 0.5, 1.0).is_err());
    }

    #[test]
    fn restrict_examples() {
        let dom = iv(0.0, 10.0);
        let m = MeanSpec::from_exprs(
            Expr::identity(),
            vec![Expr::constant(1.0), Expr::constant(2.0), Expr::identity()],
            dom,
        )
        .unwrap();
        let r = m.restrict(&[0, 2]).unwrap();
        assert_eq!(r.weights().exprs(), &[Expr::constant(1.0), Expr::identity()]);
        let same = m.restrict(&[0, 1, 2]).unwrap();
        assert_eq!(same.weights(), m.weights());
        assert!(matches!(m.restrict(&[]), Err(Error::BadIndices(_))));
        assert!(matches!(m.restrict(&[2, 1]), Err(Error::BadIndices(_))));
        assert!(matches!(m.restrict(&[0, 3]), Err(Error::BadIndices(_))));
    }

    #[test]
    fn restrictions_of_equal_means_agree() {
        // log with weights p vs its affine image with the same weights
        let dom = iv(0.5, 4.0);
        let p = vec![Expr::constant(1.0), Expr::identity(), Expr::Exp];
        let left = MeanSpec::from_exprs(Expr::Log, p.clone(), dom).unwrap();
        let right = MeanSpec::from_exprs(Expr::affine(-3.0, 2.0, Expr::Log), p, dom).unwrap();
        let (l, r) = (left.restrict(&[0, 2]).unwrap(), right.restrict(&[0, 2]).unwrap());
        for a in dom.sample_points(12) {
            for b in dom.sample_points(7) {
                let x = [a, b];
                assert!((l.mean_direct(&x).unwrap() - r.mean_direct(&x).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weight_family_rejects_nonpositive() {
        let dom = iv(-1.0, 1.0);
        assert!(WeightFamily::new(vec![Expr::identity(), Expr::Exp], dom).is_err());
        assert!(WeightFamily::new(vec![Expr::Exp], dom).is_err());
        let fam = WeightFamily::new(vec![Expr::Exp; 2], dom).unwrap();
        assert!(fam.value(1, 0.0).is_ok());
        assert!(fam.value(2, 0.0).is_err());
    }

    fn arb_generator() -> impl Strategy<Value = Expr> {
        prop_oneof![
            Just(Expr::identity()),
            Just(Expr::Log),
            Just(Expr::Exp),
            Just(Expr::Reciprocal),
            Just(Expr::power(-1.5)),
            Just(Expr::power(3.0)),
            Just(Expr::moebius(2.0, 1.0, 1.0, 3.0, Expr::identity())),
            Just(Expr::piecewise(
                vec![2.0],
                vec![Expr::Log, Expr::affine(1.0, 0.5, Expr::Log)],
                vec![]
            )),
        ]
    }

    fn arb_weight() -> impl Strategy<Value = Expr> {
        prop_oneof![
            (0.1f64..5.0).prop_map(Expr::constant),
            (0.1f64..2.0, 0.1f64..2.0).prop_map(|(a, b)| Expr::affine(a, b, Expr::identity())),
            (-0.5f64..0.5).prop_map(|a| Expr::compose(Expr::Exp, Expr::affine(a, 0.0, Expr::identity()))),
        ]
    }

    fn arb_case() -> impl Strategy<Value = (MeanSpec, Vec<f64>)> {
        (arb_generator(), proptest::collection::vec(arb_weight(), 2..=4)).prop_flat_map(|(g, w)| {
            let n = w.len();
            let m = MeanSpec::from_exprs(g, w, iv(0.0, 5.0)).unwrap();
            (Just(m), proptest::collection::vec(0.01f64..4.99, n))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn mean_value_bounds((m, x) in arb_case()) {
            let a = m.mean_direct(&x).unwrap();
            let (lo, hi) = min_max(&x);
            prop_assert!(lo <= a && a <= hi);
        }

        #[test]
        fn reflexive((m, x) in arb_case()) {
            let t = x[0];
            let diag = vec![t; m.arity()];
            prop_assert_eq!(m.mean_direct(&diag).unwrap(), t);
        }

        #[test]
        fn evaluators_agree((m, x) in arb_case()) {
            let tol = 1e-12;
            let direct = m.mean_direct(&x).unwrap();
            let signed = m.mean_by_sign_characterization(&x, tol).unwrap();
            prop_assert!((direct - signed).abs() <= 10.0 * tol, "{} vs {}", direct, signed);
            if m.generator().is_continuous() {
                let root = m.mean_by_root(&x, tol).unwrap();
                prop_assert!((direct - root).abs() <= 10.0 * tol);
            }
        }

        #[test]
        fn constant_weight_scaling((m, x) in arb_case(), lambda in 0.01f64..100.0) {
            let scaled: Vec<Expr> = m.weights().exprs().iter()
                .map(|w| Expr::product(vec![Expr::constant(lambda), w.clone()]))
                .collect();
            let s = m.with_weights(WeightFamily::new(scaled, m.domain()).unwrap()).unwrap();
            let (a, b) = (m.mean_direct(&x).unwrap(), s.mean_direct(&x).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn affine_generator_invariance((m, x) in arb_case(), alpha in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0], beta in -2.0f64..2.0) {
            let g = m.generator().expr().map_branches(|b| Expr::affine(alpha, beta, b.clone()));
            let other = MeanSpec::new(MonotoneFunction::new(g, m.domain()).unwrap(), m.weights().clone()).unwrap();
            let (a, b) = (m.mean_direct(&x).unwrap(), other.mean_direct(&x).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{} vs {}", a, b);
        }

        #[test]
        fn permutation_covariance((m, x) in arb_case(), seed in any::<u64>()) {
            let n = x.len();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut s = seed;
            for k in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(k, (s >> 33) as usize % (k + 1));
            }
            let px: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
            let pw: Vec<Expr> = perm.iter().map(|&i| m.weights().exprs()[i].clone()).collect();
            let pm = m.with_weights(WeightFamily::new(pw, m.domain()).unwrap()).unwrap();
            let (a, b) = (m.mean_direct(&x).unwrap(), pm.mean_direct(&px).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
