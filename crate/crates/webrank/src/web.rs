//! Web definitions, their combinatorial profile, and the derived matrices.
//!
//! A web in `n` variables is given by `d > n` first integrals `u_i`. An
//! abelian relation is a tuple of one-variable functions `g_i` with
//! `sum g_i(u_i) du_i = 0`; differentiating that identity repeatedly turns
//! it into linear conditions on the derivative tuples
//! `f^(h) = (g_i^(h) ∘ u_i)_i`. The coefficients of those conditions are
//! universal polynomials `C^h_L` in the derivatives of `u_i`, computed here
//! by a recursion on `|L|`, and assembled into the block matrices `M_j^(h)`,
//! their diagonal blocks `P_j`, the lower-block-triangular prolongation
//! matrix of level `k`, and its bottom band left part `Q_{k+1}`. The rank
//! of the prolongation matrix determines the dimension `rho_h` of the space
//! of order-`h` formal relations; everything downstream builds on the
//! constructions in this module.

use crate::expr::Expression;
use crate::jet::{eval_jet, Jet, JetError, Point};
use crate::linalg::{JetMatrix, RationalMatrix};
use crate::multi_index::{
    beta, beta_big, enumerate_multi_indices, monomial_count, monomial_count_big, MultiIndex,
};
use crate::rational::{rat_int, Rational};
use num::bigint::BigInt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum WebError {
    #[error("a web needs at least 2 variables, got {0}")]
    TooFewVariables(usize),
    #[error("a web in {n} variables needs at least {} first integrals, got {d}", n + 1)]
    TooFewIntegrals { n: usize, d: usize },
    #[error("integral {index} references variable {var}, but only {n} variables are declared")]
    UndeclaredVariable { index: usize, var: usize, n: usize },
}

/// A codimension-one web: `d` first integrals in `n` named variables.
#[derive(Clone, Debug)]
pub struct WebSpec {
    variables: Vec<String>,
    integrals: Vec<Expression>,
}

impl WebSpec {
    pub fn new(variables: Vec<String>, integrals: Vec<Expression>) -> Result<Self, WebError> {
        let n = variables.len();
        if n < 2 {
            return Err(WebError::TooFewVariables(n));
        }
        if integrals.len() <= n {
            return Err(WebError::TooFewIntegrals {
                n,
                d: integrals.len(),
            });
        }
        for (index, e) in integrals.iter().enumerate() {
            if let Some(var) = max_var(e) {
                if var >= n {
                    return Err(WebError::UndeclaredVariable { index, var, n });
                }
            }
        }
        Ok(WebSpec {
            variables,
            integrals,
        })
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn d(&self) -> usize {
        self.integrals.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn integrals(&self) -> &[Expression] {
        &self.integrals
    }

    pub fn combinatorics(&self) -> Combinatorics {
        Combinatorics::new(self.n(), self.d())
    }
}

fn max_var(e: &Expression) -> Option<usize> {
    match e {
        Expression::Const(_) => None,
        Expression::Var(i) => Some(*i),
        Expression::Neg(a) => max_var(a),
        Expression::Pow(a, _) => max_var(a),
        Expression::Add(a, b) | Expression::Sub(a, b) | Expression::Mul(a, b) | Expression::Div(a, b) => {
            max_var(a).into_iter().chain(max_var(b)).max()
        }
    }
}

/// The numerical profile of an `(n, d)` web: the threshold level `h0` with
/// `c(n, h0-1) < d <= c(n, h0)`, the rank bound `pi_prime`, and the
/// classical Castelnuovo bound `pi_castelnuovo`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Combinatorics {
    pub n: usize,
    pub d: usize,
    pub h0: usize,
    pub pi_prime: u64,
    pub pi_castelnuovo: u64,
}

impl Combinatorics {
    pub fn new(n: usize, d: usize) -> Combinatorics {
        assert!(n >= 2, "need n >= 2");
        assert!(d > n, "need d > n");
        let mut h0 = 1;
        while monomial_count(n, h0) < d {
            h0 += 1;
        }
        // Two expressions for the same number; computing both guards the
        // combinatorial identities behind them.
        let sum_form: u64 = (1..h0).map(|h| (d - monomial_count(n, h)) as u64).sum();
        let closed_form = (h0 as i128 - 1) * d as i128 - beta(n, h0 - 1) as i128;
        assert_eq!(sum_form as i128, closed_form, "rank bound forms disagree");
        let mut pi_castelnuovo = 0u64;
        let mut h = 1;
        while d > h * (n - 1) + 1 {
            pi_castelnuovo += (d - h * (n - 1) - 1) as u64;
            h += 1;
        }
        Combinatorics {
            n,
            d,
            h0,
            pi_prime: sum_form,
            pi_castelnuovo,
        }
    }

    /// `c(n, h)`: the number of degree-`h` multi-indices.
    pub fn c(&self, h: usize) -> BigInt {
        monomial_count_big(self.n, h)
    }

    /// `beta(k) = c(n, 1) + ... + c(n, k)`: rows of the level-`k` matrix.
    pub fn beta(&self, k: usize) -> BigInt {
        beta_big(self.n, k)
    }
}

/// The coefficient table of one first integral at one base point: jets of
/// `C^h_L(u)` for `1 <= |L| <= max_deg`, `0 <= h <= |L| - 1`. The defining
/// property is `d_L((g ∘ u) u'_lambda) = sum_h C^h_{L+1_lambda} (g^(h) ∘ u)`
/// for every smooth `g`; the table is filled by the recursion
///
/// ```text
/// C^0_{1_lambda} = u'_lambda
/// C^0_{L+1_mu}     = d_mu C^0_L
/// C^h_{L+1_mu}     = d_mu C^h_L + C^{h-1}_L u'_mu   (1 <= h <= |L|-1)
/// C^{|L|}_{L+1_mu} = C^{|L|-1}_L u'_mu
/// ```
///
/// using `mu` = first variable in the support; the result is independent of
/// that choice. A degree-`j` entry is a jet of order `u.order() - j`, so a
/// table built from a jet of order `max_deg + extra` keeps `extra` orders of
/// derivative data on the deepest entries.
pub struct CTable {
    n: usize,
    max_deg: usize,
    entries: Vec<Vec<Jet>>,
}

impl CTable {
    pub fn build(u: &Jet, max_deg: usize) -> CTable {
        assert!(max_deg >= 1, "table needs max_deg >= 1");
        assert!(
            u.order() >= max_deg,
            "jet order {} cannot support a depth-{} table",
            u.order(),
            max_deg
        );
        let n = u.n();
        let du: Vec<Jet> = (0..n).map(|lambda| u.derivative(lambda)).collect();
        let mut entries: Vec<Vec<Jet>> = Vec::new();
        for j in 1..=max_deg {
            for l in enumerate_multi_indices(n, j) {
                let mu = l.first_support().expect("degree >= 1");
                if j == 1 {
                    entries.push(vec![du[mu].clone()]);
                    continue;
                }
                let parent = &entries[Self::index_of(n, &l.minus(mu).expect("mu in support"))];
                let target_order = u.order() - j;
                let du_mu = du[mu].truncated(target_order);
                let row: Vec<Jet> = (0..j)
                    .map(|h| {
                        if h == 0 {
                            parent[0].derivative(mu)
                        } else if h < j - 1 {
                            parent[h]
                                .derivative(mu)
                                .add(&parent[h - 1].truncated(target_order).mul(&du_mu))
                        } else {
                            parent[j - 2].truncated(target_order).mul(&du_mu)
                        }
                    })
                    .collect();
                entries.push(row);
            }
        }
        CTable {
            n,
            max_deg,
            entries,
        }
    }

    fn index_of(n: usize, l: &MultiIndex) -> usize {
        beta(n, l.degree() - 1) + l.position_in_degree()
    }

    pub fn max_deg(&self) -> usize {
        self.max_deg
    }

    /// The jet of `C^h_L`; requires `1 <= |L| <= max_deg` and `h < |L|`.
    pub fn jet(&self, l: &MultiIndex, h: usize) -> &Jet {
        assert!(h < l.degree(), "C^h_L vanishes identically for h >= |L|");
        assert!(l.degree() <= self.max_deg, "table depth exceeded");
        &self.entries[Self::index_of(self.n, l)][h]
    }

    /// The value of `C^h_L` at the base point.
    pub fn value(&self, l: &MultiIndex, h: usize) -> &Rational {
        self.jet(l, h).value()
    }
}

/// All coefficient tables of a web at one base point, plus builders for the
/// block matrices assembled from them. `extra` is the number of jet orders
/// kept beyond the table depth (0 for rank work, 2 for curvature work).
pub struct PointData {
    base: Arc<Point>,
    n: usize,
    d: usize,
    max_deg: usize,
    top_order: usize,
    tables: Vec<CTable>,
}

impl PointData {
    pub fn new(
        web: &WebSpec,
        base: Arc<Point>,
        max_deg: usize,
        extra: usize,
    ) -> Result<PointData, JetError> {
        let top_order = max_deg + extra;
        let tables = web
            .integrals()
            .iter()
            .map(|u| Ok(CTable::build(&eval_jet(u, &base, top_order)?, max_deg)))
            .collect::<Result<Vec<_>, JetError>>()?;
        Ok(PointData {
            base,
            n: web.n(),
            d: web.d(),
            max_deg,
            top_order,
            tables,
        })
    }

    pub fn base(&self) -> &Arc<Point> {
        &self.base
    }

    pub fn table(&self, i: usize) -> &CTable {
        &self.tables[i]
    }

    /// `M_j^(h)`: the `c(n, j) x d` matrix of values `C^h_{i,L}`, rows
    /// indexed by the degree-`j` multi-indices, columns by foliations.
    pub fn m_block_value(&self, j: usize, h: usize) -> RationalMatrix {
        assert!(h < j, "M_j^(h) needs h <= j - 1");
        let rows = enumerate_multi_indices(self.n, j);
        RationalMatrix::from_fn(rows.len(), self.d, |r, i| {
            self.tables[i].value(&rows[r], h).clone()
        })
    }

    /// Jet-valued `M_j^(h)`, truncated to a uniform `order`.
    pub fn m_block_jet(&self, j: usize, h: usize, order: usize) -> JetMatrix {
        assert!(h < j, "M_j^(h) needs h <= j - 1");
        assert!(
            self.top_order - j >= order,
            "depth-{j} entries retain only order {}",
            self.top_order - j
        );
        let rows = enumerate_multi_indices(self.n, j);
        JetMatrix::from_fn(rows.len(), self.d, |r, i| {
            self.tables[i].jet(&rows[r], h).truncated(order)
        })
    }

    /// `P_j = M_j^(j-1)`, the diagonal block.
    pub fn p_value(&self, j: usize) -> RationalMatrix {
        self.m_block_value(j, j - 1)
    }

    pub fn p_jet(&self, j: usize, order: usize) -> JetMatrix {
        self.m_block_jet(j, j - 1, order)
    }

    /// The level-`k` prolongation matrix: `beta(k)` rows in row blocks
    /// `j = 1..k`, `k·d` columns in column blocks `h = 0..k-1`, with block
    /// `(j, h)` equal to `M_j^(h)` for `h <= j - 1` and zero above the
    /// block diagonal.
    pub fn m_script_value(&self, k: usize) -> RationalMatrix {
        assert!(k >= 1 && k <= self.max_deg, "level out of table range");
        let row_index = self.row_index(k);
        RationalMatrix::from_fn(beta(self.n, k), k * self.d, |r, c| {
            let (j, ref l) = row_index[r];
            let (h, i) = (c / self.d, c % self.d);
            if h < j {
                self.tables[i].value(l, h).clone()
            } else {
                rat_int(0)
            }
        })
    }

    /// Jet-valued level-`k` prolongation matrix at a uniform `order`.
    pub fn m_script_jet(&self, k: usize, order: usize) -> JetMatrix {
        assert!(k >= 1 && k <= self.max_deg, "level out of table range");
        assert!(self.top_order - k >= order, "insufficient jet order at depth {k}");
        let row_index = self.row_index(k);
        let zero = Jet::constant(self.base.clone(), order, rat_int(0));
        JetMatrix::from_fn(beta(self.n, k), k * self.d, |r, c| {
            let (j, ref l) = row_index[r];
            let (h, i) = (c / self.d, c % self.d);
            if h < j {
                self.tables[i].jet(l, h).truncated(order)
            } else {
                zero.clone()
            }
        })
    }

    /// `Q_{k+1} = (M_{k+1}^(0) ... M_{k+1}^(k-1))`: the left part of the
    /// bottom band appended when extending level `k` to level `k+1`.
    /// `k_plus_1` is the band degree, so the result has `c(n, k+1)` rows
    /// and `k·d` columns.
    pub fn q_value(&self, k_plus_1: usize) -> RationalMatrix {
        assert!(k_plus_1 >= 2, "band degree must be at least 2");
        let rows = enumerate_multi_indices(self.n, k_plus_1);
        let k = k_plus_1 - 1;
        RationalMatrix::from_fn(rows.len(), k * self.d, |r, c| {
            let (h, i) = (c / self.d, c % self.d);
            self.tables[i].value(&rows[r], h).clone()
        })
    }

    pub fn q_jet(&self, k_plus_1: usize, order: usize) -> JetMatrix {
        assert!(k_plus_1 >= 2, "band degree must be at least 2");
        assert!(self.top_order - k_plus_1 >= order, "insufficient jet order");
        let rows = enumerate_multi_indices(self.n, k_plus_1);
        let k = k_plus_1 - 1;
        JetMatrix::from_fn(rows.len(), k * self.d, |r, c| {
            let (h, i) = (c / self.d, c % self.d);
            self.tables[i].jet(&rows[r], h).truncated(order)
        })
    }

    fn row_index(&self, k: usize) -> Vec<(usize, MultiIndex)> {
        let mut out = Vec::with_capacity(beta(self.n, k));
        for j in 1..=k {
            for l in enumerate_multi_indices(self.n, j) {
                out.push((j, l));
            }
        }
        out
    }
}
