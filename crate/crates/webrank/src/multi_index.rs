//! Multi-indices of partial derivatives and their canonical enumeration.
//!
//! A multi-index `L = (l_1, ..., l_n)` records how many times each variable
//! is differentiated; `|L| = l_1 + ... + l_n` is its degree. Throughout the
//! crate multi-indices of a fixed degree are enumerated in descending
//! lexicographic order, and mixed-degree collections are graded (degree 0,
//! then 1, ...). Every matrix row order and jet coefficient layout derives
//! from this single convention.

use num::bigint::BigInt;

/// Exponent tuple of a partial derivative.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    /// The zero multi-index in `n` variables.
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The unit multi-index `1_lambda`.
    pub fn unit(n: usize, lambda: usize) -> Self {
        let mut v = vec![0; n];
        v[lambda] = 1;
        MultiIndex(v)
    }

    pub fn from_slice(entries: &[u32]) -> Self {
        MultiIndex(entries.to_vec())
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn entry(&self, lambda: usize) -> u32 {
        self.0[lambda]
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// `L + 1_lambda`.
    pub fn plus(&self, lambda: usize) -> Self {
        let mut v = self.0.clone();
        v[lambda] += 1;
        MultiIndex(v)
    }

    /// `L - 1_lambda`, if `l_lambda > 0`.
    pub fn minus(&self, lambda: usize) -> Option<Self> {
        if self.0[lambda] == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[lambda] -= 1;
        Some(MultiIndex(v))
    }

    /// Smallest variable index with a nonzero exponent.
    pub fn first_support(&self) -> Option<usize> {
        self.0.iter().position(|&e| e > 0)
    }

    /// Componentwise `self <= other`.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Componentwise difference `other - self`; requires `self.divides(other)`.
    pub fn complement_in(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| b - a).collect())
    }

    /// Position of `self` among the degree-`|L|` multi-indices in the
    /// canonical (descending lexicographic) enumeration.
    pub fn position_in_degree(&self) -> usize {
        let n = self.n();
        let mut pos = 0usize;
        let mut rem = self.degree();
        for i in 0..n {
            let li = self.0[i] as usize;
            // Count indices that agree on the first i entries and have a
            // larger entry here; those precede self in descending order.
            for v in (li + 1)..=rem {
                pos += monomial_count(n - 1 - i, rem - v);
            }
            rem -= li;
        }
        pos
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Number of multi-indices of degree exactly `h` in `n` variables,
/// `c(n, h) = binom(n - 1 + h, h)`. By convention `c(0, 0) = 1`.
pub fn monomial_count(n: usize, h: usize) -> usize {
    if n == 0 {
        return usize::from(h == 0);
    }
    choose(n - 1 + h, h)
}

/// Number of rows of the level-`k` prolongation matrix:
/// `beta(n, k) = c(n, 1) + ... + c(n, k) = c(n + 1, k) - 1`.
pub fn beta(n: usize, k: usize) -> usize {
    monomial_count(n + 1, k) - 1
}

fn choose(n: usize, k: usize) -> usize {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Arbitrary-precision `c(n, h)`, for combinatorial tables that may be
/// queried at levels far beyond any matrix actually built.
pub fn monomial_count_big(n: usize, h: usize) -> BigInt {
    if n == 0 {
        return BigInt::from(u8::from(h == 0));
    }
    let (top, k) = (n - 1 + h, h.min(n - 1));
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * BigInt::from(top - i) / BigInt::from(i + 1);
    }
    acc
}

/// Arbitrary-precision `beta(n, k) = c(n + 1, k) - 1`.
pub fn beta_big(n: usize, k: usize) -> BigInt {
    monomial_count_big(n + 1, k) - 1
}

/// All multi-indices of degree exactly `degree` in `n` variables, in
/// descending lexicographic order.
pub fn enumerate_multi_indices(n: usize, degree: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(monomial_count(n, degree));
    let mut current = vec![0u32; n];
    fill(&mut out, &mut current, 0, degree);
    out
}

fn fill(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, at: usize, rem: usize) {
    if at + 1 == current.len() {
        current[at] = rem as u32;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for v in (0..=rem).rev() {
        current[at] = v as u32;
        fill(out, current, at + 1, rem - v);
    }
}

/// All multi-indices of degree `0..=max_degree`, graded, each grade in the
/// canonical order. This is the jet coefficient layout.
pub fn enumerate_up_to(n: usize, max_degree: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for j in 0..=max_degree {
        out.extend(enumerate_multi_indices(n, j));
    }
    out
}

/// Multinomial coefficient `binom(L, L') = prod binom(l_i, l'_i)`; the
/// weight of the pair `(L', L - L')` in the Leibniz product rule for raw
/// derivative coefficients.
pub fn multinomial(l: &MultiIndex, lp: &MultiIndex) -> BigInt {
    debug_assert!(lp.divides(l));
    let mut acc: u128 = 1;
    for (a, b) in l.0.iter().zip(&lp.0) {
        acc *= choose(*a as usize, *b as usize) as u128;
    }
    BigInt::from(acc)
}
