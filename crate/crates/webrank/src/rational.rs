//! Exact rational scalars.
//!
//! All arithmetic in this crate is exact: scalars are arbitrary-precision
//! rationals kept in canonical form (reduced, positive denominator). The
//! canonical text form is `p/q`, or just `p` when the denominator is 1.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// Arbitrary-precision rational number in canonical form.
pub type Rational = BigRational;

/// Builds a rational from an integer.
pub fn rat_int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Builds the rational `num/den`. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses the canonical text form `p` or `p/q` (optional leading `-`).
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

/// Canonical text form: `p/q`, or `p` when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Total size of a rational in bits (numerator plus denominator magnitude).
///
/// Used as a pivot-selection heuristic: preferring small pivots keeps
/// coefficient growth down during exact elimination.
pub fn bit_length(r: &Rational) -> u64 {
    r.numer().abs().bits() + r.denom().bits()
}
