//! Truncated multivariate Taylor data ("jets") with exact coefficients.
//!
//! A `Jet` stores the raw partial derivatives `d_L u` of a function at a
//! base point, for all multi-indices `L` with `|L| <= order` — raw meaning
//! the actual derivative values, not divided by `L!`. With that
//! normalization the product rule is the Leibniz convolution weighted by
//! multinomial coefficients, and taking `d/d_lambda` of a jet is a pure
//! coefficient shift `coeffs[L] <- coeffs[L + 1_lambda]` that lowers the
//! order by one.
//!
//! All arithmetic requires operands over the same base point and order;
//! mismatches are programming errors and panic. Data-driven failures
//! (poles, non-invertible elements) are reported as `JetError`.

use crate::expr::Expression;
use crate::multi_index::{enumerate_up_to, multinomial, MultiIndex};
use crate::rational::{format_rational, rat_int, Rational};
use num::Zero;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

/// A rational point in `n` variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Point {
    coords: Vec<Rational>,
}

impl Point {
    pub fn new(coords: Vec<Rational>) -> Self {
        Point { coords }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    /// Parses `"1, -2/3, 5"` into a point.
    pub fn parse(text: &str) -> Option<Point> {
        let coords: Option<Vec<Rational>> = text
            .split(',')
            .map(crate::rational::parse_rational)
            .collect();
        Some(Point::new(coords?))
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_rational(c))?;
        }
        write!(f, ")")
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum JetError {
    #[error("pole at the base point (division by a function vanishing there)")]
    PoleAtBase,
    #[error("jet reciprocal of an element with zero constant term")]
    NonUnit,
}

/// Shared layout data for all jets with a given `(n, order)`: the graded
/// multi-index enumeration, position lookup, derivative shift tables, and
/// the Leibniz product plan. Built once per shape and cached globally.
struct JetShape {
    n: usize,
    order: usize,
    indices: Vec<MultiIndex>,
    /// Offset of each grade in `indices`.
    grade_offsets: Vec<usize>,
    /// `shift[lambda][i]` = position of `indices[i] + 1_lambda`, for
    /// `deg(indices[i]) < order`.
    shift: Vec<Vec<usize>>,
    /// Leibniz plan: `(ia, ib, iout, weight)` over all ordered pairs with
    /// `deg a + deg b <= order`.
    product_plan: Vec<(u32, u32, u32, Rational)>,
}

impl JetShape {
    fn build(n: usize, order: usize) -> JetShape {
        let indices = enumerate_up_to(n, order);
        let mut grade_offsets = vec![0usize; order + 2];
        for (i, m) in indices.iter().enumerate() {
            // First index of each grade.
            let g = m.degree();
            if grade_offsets[g + 1] <= i {
                grade_offsets[g + 1] = i + 1;
            }
        }
        let mut pos_of: HashMap<MultiIndex, usize> = HashMap::new();
        for (i, m) in indices.iter().enumerate() {
            pos_of.insert(m.clone(), i);
        }
        let mut shift = vec![Vec::new(); n];
        for (lambda, col) in shift.iter_mut().enumerate() {
            for m in &indices {
                if m.degree() < order {
                    col.push(pos_of[&m.plus(lambda)]);
                } else {
                    col.push(usize::MAX);
                }
            }
        }
        let mut product_plan = Vec::new();
        for (ia, ma) in indices.iter().enumerate() {
            for (ib, mb) in indices.iter().enumerate() {
                if ma.degree() + mb.degree() > order {
                    continue;
                }
                let mut sum = ma.clone();
                for lam in 0..n {
                    for _ in 0..mb.entry(lam) {
                        sum = sum.plus(lam);
                    }
                }
                let weight = Rational::from_integer(multinomial(&sum, ma));
                product_plan.push((ia as u32, ib as u32, pos_of[&sum] as u32, weight));
            }
        }
        JetShape {
            n,
            order,
            indices,
            grade_offsets,
            shift,
            product_plan,
        }
    }
}

type ShapeCache = Mutex<HashMap<(usize, usize), Arc<JetShape>>>;

fn shape(n: usize, order: usize) -> Arc<JetShape> {
    static CACHE: OnceLock<ShapeCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("jet shape cache poisoned");
    map.entry((n, order))
        .or_insert_with(|| Arc::new(JetShape::build(n, order)))
        .clone()
}

/// Raw-derivative Taylor data of one function at a base point.
#[derive(Clone)]
pub struct Jet {
    shape: Arc<JetShape>,
    base: Arc<Point>,
    coeffs: Vec<Rational>,
}

impl Jet {
    /// The constant function `value`.
    pub fn constant(base: Arc<Point>, order: usize, value: Rational) -> Jet {
        let shape = shape(base.n(), order);
        let mut coeffs = vec![rat_int(0); shape.indices.len()];
        coeffs[0] = value;
        Jet {
            shape,
            base,
            coeffs,
        }
    }

    /// The coordinate function `x_lambda`.
    pub fn coordinate(base: Arc<Point>, order: usize, lambda: usize) -> Jet {
        let mut jet = Jet::constant(base.clone(), order, base.coords()[lambda].clone());
        if order >= 1 {
            let pos = jet.shape.grade_offsets[1] + lambda;
            jet.coeffs[pos] = rat_int(1);
        }
        jet
    }

    pub fn order(&self) -> usize {
        self.shape.order
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    pub fn base(&self) -> &Arc<Point> {
        &self.base
    }

    /// Value at the base point (the degree-0 coefficient).
    pub fn value(&self) -> &Rational {
        &self.coeffs[0]
    }

    /// Raw derivative `d_L` at the base point; `|L| <= order`.
    pub fn coeff(&self, l: &MultiIndex) -> &Rational {
        let pos = self.shape.grade_offsets[l.degree()] + l.position_in_degree();
        &self.coeffs[pos]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    fn check_compatible(&self, other: &Jet) {
        assert_eq!(
            self.shape.order, other.shape.order,
            "jet arithmetic requires equal orders"
        );
        assert_eq!(self.shape.n, other.shape.n, "jet arithmetic requires equal n");
        assert!(
            Arc::ptr_eq(&self.base, &other.base) || self.base == other.base,
            "jet arithmetic requires equal base points"
        );
    }

    pub fn add(&self, other: &Jet) -> Jet {
        self.check_compatible(other);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Jet {
            shape: self.shape.clone(),
            base: self.base.clone(),
            coeffs,
        }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.check_compatible(other);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Jet {
            shape: self.shape.clone(),
            base: self.base.clone(),
            coeffs,
        }
    }

    pub fn neg(&self) -> Jet {
        Jet {
            shape: self.shape.clone(),
            base: self.base.clone(),
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    /// Leibniz product: `(ab)_L = sum binom(L, L') a_{L'} b_{L - L'}`.
    pub fn mul(&self, other: &Jet) -> Jet {
        self.check_compatible(other);
        let mut coeffs = vec![rat_int(0); self.coeffs.len()];
        for (ia, ib, iout, weight) in &self.shape.product_plan {
            let a = &self.coeffs[*ia as usize];
            if a.is_zero() {
                continue;
            }
            let b = &other.coeffs[*ib as usize];
            if b.is_zero() {
                continue;
            }
            coeffs[*iout as usize] += a * b * weight;
        }
        Jet {
            shape: self.shape.clone(),
            base: self.base.clone(),
            coeffs,
        }
    }

    /// Multiply by a scalar.
    pub fn scale(&self, s: &Rational) -> Jet {
        Jet {
            shape: self.shape.clone(),
            base: self.base.clone(),
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
        }
    }

    /// Multiplicative inverse; requires a nonzero value at the base point.
    ///
    /// Solved grade by grade from `self * inv = 1`, which is exact in the
    /// truncated ring.
    pub fn reciprocal(&self) -> Result<Jet, JetError> {
        if self.coeffs[0].is_zero() {
            return Err(JetError::NonUnit);
        }
        let inv0 = rat_int(1) / self.coeffs[0].clone();
        let mut inv = vec![rat_int(0); self.coeffs.len()];
        inv[0] = inv0.clone();
        // Accumulate sum_{L' != 0} binom(L, L') a_{L'} inv_{L - L'} per L;
        // the plan is ordered so that iout's grade >= ib's grade, and we fill
        // grades in increasing order.
        let mut acc = vec![rat_int(0); self.coeffs.len()];
        for g in 1..=self.shape.order {
            let lo = self.shape.grade_offsets[g];
            let hi = self.shape.grade_offsets[g + 1];
            for (ia, ib, iout, weight) in &self.shape.product_plan {
                let out = *iout as usize;
                if out < lo || out >= hi || *ia == 0 {
                    continue;
                }
                let a = &self.coeffs[*ia as usize];
                if a.is_zero() {
                    continue;
                }
                let b = &inv[*ib as usize];
                if b.is_zero() {
                    continue;
                }
                acc[out] += a * b * weight;
            }
            for out in lo..hi {
                inv[out] = -&acc[out] * &inv0;
            }
        }
        Ok(Jet {
            shape: self.shape.clone(),
            base: self.base.clone(),
            coeffs: inv,
        })
    }

    /// Divide by another jet; errors if the divisor vanishes at the base.
    pub fn div(&self, other: &Jet) -> Result<Jet, JetError> {
        Ok(self.mul(&other.reciprocal()?))
    }

    /// Nonnegative integer power by repeated multiplication.
    pub fn pow(&self, k: u32) -> Jet {
        let mut acc = Jet::constant(self.base.clone(), self.shape.order, rat_int(1));
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// The jet of `d u / d x_lambda`, one order lower: a coefficient shift.
    pub fn derivative(&self, lambda: usize) -> Jet {
        assert!(self.shape.order >= 1, "cannot differentiate an order-0 jet");
        let target = shape(self.shape.n, self.shape.order - 1);
        let coeffs = (0..target.indices.len())
            .map(|i| self.coeffs[self.shape.shift[lambda][i]].clone())
            .collect();
        Jet {
            shape: target,
            base: self.base.clone(),
            coeffs,
        }
    }

    /// Forgets coefficients above `new_order` (which must not exceed the
    /// current order). With the graded layout this is a prefix copy.
    pub fn truncated(&self, new_order: usize) -> Jet {
        assert!(new_order <= self.shape.order, "truncation cannot raise order");
        if new_order == self.shape.order {
            return self.clone();
        }
        let target = shape(self.shape.n, new_order);
        let coeffs = self.coeffs[..target.indices.len()].to_vec();
        Jet {
            shape: target,
            base: self.base.clone(),
            coeffs,
        }
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.shape.order == other.shape.order
            && self.shape.n == other.shape.n
            && self.base == other.base
            && self.coeffs == other.coeffs
    }
}

impl Eq for Jet {}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Jet(order {}; ", self.shape.order)?;
        for (i, m) in self.shape.indices.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}: {}", m, format_rational(&self.coeffs[i]))?;
        }
        write!(f, ")")
    }
}

/// Evaluates an expression to a jet of the given order at a base point.
///
/// Errors with `PoleAtBase` when a division hits a denominator vanishing at
/// the point; this is the signal callers use to resample.
pub fn eval_jet(
    e: &Expression,
    base: &Arc<Point>,
    order: usize,
) -> Result<Jet, JetError> {
    match e {
        Expression::Const(c) => Ok(Jet::constant(base.clone(), order, c.clone())),
        Expression::Var(i) => Ok(Jet::coordinate(base.clone(), order, *i)),
        Expression::Neg(a) => Ok(eval_jet(a, base, order)?.neg()),
        Expression::Add(a, b) => Ok(eval_jet(a, base, order)?.add(&eval_jet(b, base, order)?)),
        Expression::Sub(a, b) => Ok(eval_jet(a, base, order)?.sub(&eval_jet(b, base, order)?)),
        Expression::Mul(a, b) => Ok(eval_jet(a, base, order)?.mul(&eval_jet(b, base, order)?)),
        Expression::Div(a, b) => eval_jet(a, base, order)?
            .div(&eval_jet(b, base, order)?)
            .map_err(|_| JetError::PoleAtBase),
        Expression::Pow(a, k) => Ok(eval_jet(a, base, order)?.pow(*k)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::rational::rat;

    fn at(coords: &[Rational]) -> Arc<Point> {
        Arc::new(Point::new(coords.to_vec()))
    }

    fn vars2() -> Vec<String> {
        vec!["x".into(), "y".into()]
    }

    #[test]
    fn monomial_jet_matches_derivatives() {
        // u = x^5 at (1, 0): d^k/dx^k = 5!/(5-k)! * x^(5-k).
        let e = parse_expression("x^5", &vars2()).unwrap();
        let base = at(&[rat_int(1), rat_int(0)]);
        let jet = eval_jet(&e, &base, 3).unwrap();
        assert_eq!(*jet.value(), rat_int(1));
        assert_eq!(*jet.coeff(&MultiIndex::from_slice(&[1, 0])), rat_int(5));
        assert_eq!(*jet.coeff(&MultiIndex::from_slice(&[2, 0])), rat_int(20));
        assert_eq!(*jet.coeff(&MultiIndex::from_slice(&[3, 0])), rat_int(60));
        assert_eq!(*jet.coeff(&MultiIndex::from_slice(&[0, 1])), rat_int(0));
    }

    #[test]
    fn product_uses_leibniz_weights() {
        // (x * y) at (2, 3): d_(1,1) = 1, d_x = y = 3, d_y = x = 2.
        let vars = vars2();
        let x = parse_expression("x", &vars).unwrap();
        let y = parse_expression("y", &vars).unwrap();
        let base = at(&[rat_int(2), rat_int(3)]);
        let jx = eval_jet(&x, &base, 2).unwrap();
        let jy = eval_jet(&y, &base, 2).unwrap();
        let p = jx.mul(&jy);
        assert_eq!(*p.value(), rat_int(6));
        assert_eq!(*p.coeff(&MultiIndex::from_slice(&[1, 0])), rat_int(3));
        assert_eq!(*p.coeff(&MultiIndex::from_slice(&[0, 1])), rat_int(2));
        assert_eq!(*p.coeff(&MultiIndex::from_slice(&[1, 1])), rat_int(1));
        assert_eq!(*p.coeff(&MultiIndex::from_slice(&[2, 0])), rat_int(0));
    }

    #[test]
    fn reciprocal_of_one_plus_x() {
        // 1/(1+x) at x=0 (n=1): derivatives 1, -1, 2, -6.
        let vars: Vec<String> = vec!["x".into()];
        let e = parse_expression("1/(1 + x)", &vars).unwrap();
        let base = at(&[rat_int(0)]);
        let jet = eval_jet(&e, &base, 3).unwrap();
        assert_eq!(*jet.value(), rat_int(1));
        assert_eq!(*jet.coeff(&MultiIndex::from_slice(&[1])), rat_int(-1));
        assert_eq!(*jet.coeff(&MultiIndex::from_slice(&[2])), rat_int(2));
        assert_eq!(*jet.coeff(&MultiIndex::from_slice(&[3])), rat_int(-6));
    }

    #[test]
    fn reciprocal_requires_unit() {
        let vars = vars2();
        let e = parse_expression("x - 1", &vars).unwrap();
        let base = at(&[rat_int(1), rat_int(0)]);
        let jet = eval_jet(&e, &base, 2).unwrap();
        assert_eq!(jet.reciprocal(), Err(JetError::NonUnit));
        assert_eq!(
            eval_jet(
                &parse_expression("y/(x - 1)", &vars).unwrap(),
                &base,
                2
            ),
            Err(JetError::PoleAtBase)
        );
    }

    #[test]
    fn product_with_reciprocal_is_identity() {
        let vars = vars2();
        let e = parse_expression("1 + x*y - y^2", &vars).unwrap();
        let base = at(&[rat(1, 2), rat(1, 3)]);
        let jet = eval_jet(&e, &base, 4).unwrap();
        let inv = jet.reciprocal().unwrap();
        let one = jet.mul(&inv);
        let expected = Jet::constant(base, 4, rat_int(1));
        assert_eq!(one, expected);
    }

    #[test]
    fn derivative_is_coefficient_shift() {
        let vars = vars2();
        let e = parse_expression("x^2*y + y^3", &vars).unwrap();
        let base = at(&[rat_int(2), rat_int(3)]);
        let jet = eval_jet(&e, &base, 3).unwrap();
        let dx = jet.derivative(0);
        assert_eq!(dx.order(), 2);
        // d/dx = 2xy -> 12 at (2,3); d^2/dxdy of original = 2x -> 4.
        assert_eq!(*dx.value(), rat_int(12));
        assert_eq!(*dx.coeff(&MultiIndex::from_slice(&[0, 1])), rat_int(4));
    }

    #[test]
    #[should_panic(expected = "equal orders")]
    fn mismatched_orders_panic() {
        let base = at(&[rat_int(0), rat_int(0)]);
        let a = Jet::constant(base.clone(), 2, rat_int(1));
        let b = Jet::constant(base, 3, rat_int(1));
        let _ = a.add(&b);
    }

    #[test]
    #[should_panic(expected = "equal base points")]
    fn mismatched_bases_panic() {
        let a = Jet::constant(at(&[rat_int(0), rat_int(0)]), 2, rat_int(1));
        let b = Jet::constant(at(&[rat_int(1), rat_int(0)]), 2, rat_int(1));
        let _ = a.mul(&b);
    }

    #[test]
    fn truncation_is_prefix() {
        let vars = vars2();
        let e = parse_expression("x^3 + x*y", &vars).unwrap();
        let base = at(&[rat_int(1), rat_int(2)]);
        let jet = eval_jet(&e, &base, 4).unwrap();
        let t = jet.truncated(2);
        assert_eq!(t.order(), 2);
        for l in crate::multi_index::enumerate_up_to(2, 2) {
            assert_eq!(t.coeff(&l), jet.coeff(&l));
        }
    }
}
