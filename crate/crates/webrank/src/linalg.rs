//! Exact dense linear algebra over the rationals and over the truncated-jet
//! ring.
//!
//! Rational matrices support rank (full pivoting), right-kernel bases,
//! pivoted solving of full-column-rank systems, and the generalized inverse
//! `(PᵀP)⁻¹Pᵀ`. Jet matrices support constant-rank elimination: a reduced
//! echelon form over the local ring using only unit pivots (entries with a
//! nonzero value at the base point), which yields kernel frames and solves
//! linear systems exactly — row operations by units are invertible over the
//! ring, so no jet order is lost.
//!
//! Pivot selection is deterministic everywhere: smallest bit-length of the
//! (constant part of the) candidate entry, ties broken in row-major order.

use crate::jet::Jet;
use crate::rational::{bit_length, rat_int, Rational};
use num::Zero;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix lacks full column rank (need {need}, found {found})")]
    RankDeficient { need: usize, found: usize },
    #[error("rank at the base point is {found}, expected {expected}")]
    RankMismatch { expected: usize, found: usize },
    #[error("no unit pivot available: rank is lower at the base point than nearby")]
    NonConstantRank,
    #[error("linear system over the jet ring is inconsistent")]
    Inconsistent,
}

/// Dense row-major matrix of exact rationals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            entries: vec![rat_int(0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, rat_int(1));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        RationalMatrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        RationalMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Rational::is_zero)
    }

    pub fn transpose(&self) -> RationalMatrix {
        RationalMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        RationalMatrix::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = rat_int(0);
            for k in 0..self.cols {
                let a = self.get(r, k);
                if !a.is_zero() {
                    acc += a * other.get(k, c);
                }
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|r| {
                let mut acc = rat_int(0);
                for (a, x) in self.row(r).iter().zip(v) {
                    if !a.is_zero() && !x.is_zero() {
                        acc += a * x;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RationalMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c) + other.get(r, c))
    }

    pub fn sub(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RationalMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c) - other.get(r, c))
    }

    /// Exact rank by Gaussian elimination with full pivoting; the pivot is
    /// the remaining entry of smallest bit-length (row-major tie-break).
    pub fn rank(&self) -> usize {
        let mut work: Vec<Vec<Rational>> = (0..self.rows).map(|r| self.row(r).to_vec()).collect();
        let mut row_used = vec![false; self.rows];
        let mut col_used = vec![false; self.cols];
        let mut rank = 0;
        loop {
            let mut best: Option<(usize, usize, u64)> = None;
            for (r, row) in work.iter().enumerate() {
                if row_used[r] {
                    continue;
                }
                for (c, v) in row.iter().enumerate() {
                    if col_used[c] || v.is_zero() {
                        continue;
                    }
                    let bits = bit_length(v);
                    if best.as_ref().is_none_or(|&(_, _, b)| bits < b) {
                        best = Some((r, c, bits));
                    }
                }
            }
            let Some((pr, pc, _)) = best else { break };
            rank += 1;
            row_used[pr] = true;
            col_used[pc] = true;
            let pivot_row = work[pr].clone();
            let pivot = pivot_row[pc].clone();
            for (r, row) in work.iter_mut().enumerate() {
                if row_used[r] || row[pc].is_zero() {
                    continue;
                }
                let factor = &row[pc] / &pivot;
                for (c, v) in row.iter_mut().enumerate() {
                    if col_used[c] {
                        *v = rat_int(0);
                    } else if !pivot_row[c].is_zero() {
                        *v -= &factor * &pivot_row[c];
                    }
                }
            }
        }
        rank
    }

    /// Reduced row-echelon form; returns (reduced rows, pivot (row, col) list).
    fn rref(&self) -> (Vec<Vec<Rational>>, Vec<(usize, usize)>) {
        let mut work: Vec<Vec<Rational>> = (0..self.rows).map(|r| self.row(r).to_vec()).collect();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut next_row = 0;
        for col in 0..self.cols {
            let mut best: Option<(usize, u64)> = None;
            for (r, wrow) in work.iter().enumerate().skip(next_row) {
                let v = &wrow[col];
                if v.is_zero() {
                    continue;
                }
                let bits = bit_length(v);
                if best.is_none_or(|(_, b)| bits < b) {
                    best = Some((r, bits));
                }
            }
            let Some((pr, _)) = best else { continue };
            work.swap(next_row, pr);
            let pivot = work[next_row][col].clone();
            for v in &mut work[next_row] {
                *v /= &pivot;
            }
            let pivot_row = work[next_row].clone();
            for (r, row) in work.iter_mut().enumerate() {
                if r == next_row || row[col].is_zero() {
                    continue;
                }
                let factor = row[col].clone();
                for (c, v) in row.iter_mut().enumerate() {
                    if !pivot_row[c].is_zero() {
                        *v -= &factor * &pivot_row[c];
                    }
                }
            }
            pivots.push((next_row, col));
            next_row += 1;
        }
        (work, pivots)
    }

    /// Basis of the right null space; `m·v = 0` exactly for each vector.
    /// One vector per non-pivot column, in ascending column order.
    pub fn kernel_basis(&self) -> Vec<Vec<Rational>> {
        let (work, pivots) = self.rref();
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = vec![rat_int(0); self.cols];
            v[free] = rat_int(1);
            for &(pr, pc) in &pivots {
                v[pc] = -work[pr][free].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Solves `m·x = rhs` for a matrix of full column rank by selecting the
    /// first linearly independent rows in row order; returns the solution
    /// and the selected pivot rows so callers can form residuals on the
    /// remaining rows.
    pub fn solve_pivoted(
        &self,
        rhs: &[Rational],
    ) -> Result<(Vec<Rational>, Vec<usize>), LinalgError> {
        assert_eq!(self.rows, rhs.len(), "rhs length must equal row count");
        // Incremental Gauss-Jordan over the selected rows: each kept row is
        // reduced to a unit vector on the pivot columns found so far.
        let mut reduced: Vec<(Vec<Rational>, Rational, usize, usize)> = Vec::new();
        for (r, rhs_r) in rhs.iter().enumerate() {
            if reduced.len() == self.cols {
                break;
            }
            let mut row = self.row(r).to_vec();
            let mut b = rhs_r.clone();
            for (rrow, rb, _, pc) in &reduced {
                let factor = row[*pc].clone();
                if factor.is_zero() {
                    continue;
                }
                for (c, v) in row.iter_mut().enumerate() {
                    if !rrow[c].is_zero() {
                        *v -= &factor * &rrow[c];
                    }
                }
                b -= &factor * rb;
            }
            let Some(pc) = row.iter().position(|v| !v.is_zero()) else {
                continue;
            };
            let pivot = row[pc].clone();
            for v in &mut row {
                *v /= &pivot;
            }
            b /= &pivot;
            for (rrow, rb, _, _) in &mut reduced {
                let factor = rrow[pc].clone();
                if factor.is_zero() {
                    continue;
                }
                for (c, v) in rrow.iter_mut().enumerate() {
                    if !row[c].is_zero() {
                        *v -= &factor * &row[c];
                    }
                }
                *rb -= &factor * &b;
            }
            reduced.push((row, b, r, pc));
        }
        if reduced.len() < self.cols {
            return Err(LinalgError::RankDeficient {
                need: self.cols,
                found: reduced.len(),
            });
        }
        let mut solution = vec![rat_int(0); self.cols];
        let mut pivot_rows = Vec::with_capacity(self.cols);
        for (_, b, orig, pc) in &reduced {
            solution[*pc] = b.clone();
            pivot_rows.push(*orig);
        }
        pivot_rows.sort_unstable();
        Ok((solution, pivot_rows))
    }

    /// Square inverse by Gauss-Jordan; errors when singular.
    fn inverse(&self) -> Result<RationalMatrix, LinalgError> {
        assert_eq!(self.rows, self.cols, "inverse requires a square matrix");
        let n = self.rows;
        let mut work: Vec<Vec<Rational>> = (0..n)
            .map(|r| {
                let mut row = self.row(r).to_vec();
                row.extend((0..n).map(|c| rat_int((c == r) as i64)));
                row
            })
            .collect();
        for col in 0..n {
            let mut best: Option<(usize, u64)> = None;
            for (r, row) in work.iter().enumerate().skip(col) {
                if row[col].is_zero() {
                    continue;
                }
                let bits = bit_length(&row[col]);
                if best.is_none_or(|(_, b)| bits < b) {
                    best = Some((r, bits));
                }
            }
            let Some((pr, _)) = best else {
                return Err(LinalgError::RankDeficient {
                    need: n,
                    found: col,
                });
            };
            work.swap(col, pr);
            let pivot = work[col][col].clone();
            for v in &mut work[col] {
                *v /= &pivot;
            }
            let pivot_row = work[col].clone();
            for (r, row) in work.iter_mut().enumerate() {
                if r == col || row[col].is_zero() {
                    continue;
                }
                let factor = row[col].clone();
                for (c, v) in row.iter_mut().enumerate() {
                    if !pivot_row[c].is_zero() {
                        *v -= &factor * &pivot_row[c];
                    }
                }
            }
        }
        Ok(RationalMatrix::from_fn(n, n, |r, c| work[r][n + c].clone()))
    }

    /// The generalized inverse `(PᵀP)⁻¹Pᵀ` of a full-column-rank matrix;
    /// satisfies `ginv(P)·P = identity`.
    pub fn generalized_inverse(&self) -> Result<RationalMatrix, LinalgError> {
        let pt = self.transpose();
        let gram = pt.mul(self);
        let inv = gram.inverse().map_err(|_| LinalgError::RankDeficient {
            need: self.cols,
            found: self.rank(),
        })?;
        Ok(inv.mul(&pt))
    }
}

/// Dense matrix of jets sharing one base point and one order.
#[derive(Clone)]
pub struct JetMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Jet>,
}

impl JetMatrix {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Jet>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        if let Some(first) = entries.first() {
            assert!(
                entries
                    .iter()
                    .all(|j| j.order() == first.order() && j.base() == first.base()),
                "jet matrix entries must share base and order"
            );
        }
        JetMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Jet) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self::from_entries(rows, cols, entries)
    }

    /// Builds a matrix whose columns are the given jet vectors.
    pub fn from_columns(columns: &[Vec<Jet>]) -> Self {
        let cols = columns.len();
        assert!(cols > 0, "need at least one column");
        let rows = columns[0].len();
        assert!(columns.iter().all(|c| c.len() == rows), "ragged columns");
        Self::from_fn(rows, cols, |r, c| columns[c][r].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Jet {
        &self.entries[r * self.cols + c]
    }

    pub fn neg(&self) -> JetMatrix {
        JetMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(Jet::neg).collect(),
        }
    }

    pub fn mul(&self, other: &JetMatrix) -> JetMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in jet matrix product");
        let base = self.entries[0].base().clone();
        let order = self.order();
        JetMatrix::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = Jet::constant(base.clone(), order, rat_int(0));
            for k in 0..self.cols {
                let a = self.get(r, k);
                let b = other.get(k, c);
                if !a.is_zero() && !b.is_zero() {
                    acc = acc.add(&a.mul(b));
                }
            }
            acc
        })
    }

    pub fn order(&self) -> usize {
        self.entries[0].order()
    }

    /// The matrix of values at the base point.
    pub fn value_matrix(&self) -> RationalMatrix {
        RationalMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).value().clone())
    }

    pub fn mul_jet_vec(&self, v: &[Jet]) -> Vec<Jet> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut acc: Option<Jet> = None;
                for (c, vc) in v.iter().enumerate() {
                    let a = self.get(r, c);
                    if a.is_zero() || vc.is_zero() {
                        continue;
                    }
                    let term = a.mul(vc);
                    acc = Some(match acc {
                        None => term,
                        Some(s) => s.add(&term),
                    });
                }
                acc.unwrap_or_else(|| {
                    Jet::constant(self.entries[0].base().clone(), self.order(), rat_int(0))
                })
            })
            .collect()
    }

    /// Reduced echelon form over the jet ring, restricted to pivots in the
    /// first `pivot_cols` columns. Only unit pivots (nonzero constant term)
    /// are used, chosen by smallest bit-length of the constant term with
    /// row-major tie-break; each step divides by the pivot jet, which is
    /// invertible in the ring, so the reduction is exact at full order.
    fn jet_rref(
        work: &mut [Vec<Jet>],
        pivot_cols: usize,
    ) -> Result<Vec<(usize, usize)>, LinalgError> {
        let rows = work.len();
        let mut row_used = vec![false; rows];
        let mut col_used = vec![false; pivot_cols];
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        loop {
            let mut best: Option<(usize, usize, u64)> = None;
            let mut nonzero_jet_left = false;
            for (r, row) in work.iter().enumerate() {
                if row_used[r] {
                    continue;
                }
                for (c, entry) in row.iter().enumerate().take(pivot_cols) {
                    if col_used[c] {
                        continue;
                    }
                    if entry.value().is_zero() {
                        if !entry.is_zero() {
                            nonzero_jet_left = true;
                        }
                        continue;
                    }
                    let bits = bit_length(entry.value());
                    if best.as_ref().is_none_or(|&(_, _, b)| bits < b) {
                        best = Some((r, c, bits));
                    }
                }
            }
            let Some((pr, pc, _)) = best else {
                if nonzero_jet_left {
                    return Err(LinalgError::NonConstantRank);
                }
                break;
            };
            row_used[pr] = true;
            col_used[pc] = true;
            let inv = work[pr][pc]
                .reciprocal()
                .expect("pivot has nonzero constant term");
            for entry in &mut work[pr] {
                if !entry.is_zero() {
                    *entry = entry.mul(&inv);
                }
            }
            let pivot_row = work[pr].clone();
            for (r, row) in work.iter_mut().enumerate() {
                if r == pr || row[pc].is_zero() {
                    continue;
                }
                let factor = row[pc].clone();
                for (c, entry) in row.iter_mut().enumerate() {
                    if !pivot_row[c].is_zero() {
                        *entry = entry.sub(&factor.mul(&pivot_row[c]));
                    }
                }
            }
            pivots.push((pr, pc));
        }
        pivots.sort_unstable_by_key(|&(_, c)| c);
        Ok(pivots)
    }

    /// Jet vectors spanning the right kernel over the truncated-series
    /// ring: `m·v = 0` coefficient-wise at the full order, and the constant
    /// terms form a kernel basis of the evaluated matrix. One vector per
    /// non-pivot column, ascending.
    pub fn kernel_frame(&self, expected_rank: usize) -> Result<Vec<Vec<Jet>>, LinalgError> {
        let mut work: Vec<Vec<Jet>> = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).clone()).collect())
            .collect();
        let pivots = Self::jet_rref(&mut work, self.cols)?;
        if pivots.len() != expected_rank {
            return Err(LinalgError::RankMismatch {
                expected: expected_rank,
                found: pivots.len(),
            });
        }
        let base = self.entries[0].base().clone();
        let order = self.order();
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let mut frame = Vec::new();
        for free in 0..self.cols {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v: Vec<Jet> = (0..self.cols)
                .map(|_| Jet::constant(base.clone(), order, rat_int(0)))
                .collect();
            v[free] = Jet::constant(base.clone(), order, rat_int(1));
            for &(pr, pc) in &pivots {
                v[pc] = work[pr][free].neg();
            }
            frame.push(v);
        }
        Ok(frame)
    }

    /// Solves `self · X = rhs` over the jet ring for a coefficient matrix
    /// of full column rank, with one solution column per rhs column. The
    /// system must be exactly consistent: after elimination every unused
    /// row must carry a zero residual at the full jet order.
    pub fn solve_columns(&self, rhs: &JetMatrix) -> Result<JetMatrix, LinalgError> {
        assert_eq!(self.rows, rhs.rows, "rhs row count mismatch");
        let mut work: Vec<Vec<Jet>> = (0..self.rows)
            .map(|r| {
                let mut row: Vec<Jet> = (0..self.cols).map(|c| self.get(r, c).clone()).collect();
                row.extend((0..rhs.cols).map(|c| rhs.get(r, c).clone()));
                row
            })
            .collect();
        let pivots = Self::jet_rref(&mut work, self.cols)?;
        if pivots.len() < self.cols {
            return Err(LinalgError::RankDeficient {
                need: self.cols,
                found: pivots.len(),
            });
        }
        // All coefficient columns are pivot columns, so every non-pivot row
        // has a zero coefficient part; its rhs part is the residual.
        let pivot_rows: Vec<usize> = pivots.iter().map(|&(r, _)| r).collect();
        for (r, row) in work.iter().enumerate() {
            if pivot_rows.contains(&r) {
                continue;
            }
            if row[self.cols..].iter().any(|j| !j.is_zero()) {
                return Err(LinalgError::Inconsistent);
            }
        }
        let base = self.entries[0].base().clone();
        let order = self.order();
        let mut solution = JetMatrix::from_fn(self.cols, rhs.cols, |_, _| {
            Jet::constant(base.clone(), order, rat_int(0))
        });
        for &(pr, pc) in &pivots {
            for t in 0..rhs.cols {
                solution.entries[pc * rhs.cols + t] = work[pr][self.cols + t].clone();
            }
        }
        Ok(solution)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{eval_jet, Point};
    use crate::rational::rat;
    use std::sync::Arc;

    fn m(rows: &[&[i64]]) -> RationalMatrix {
        RationalMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| rat_int(v)).collect())
                .collect(),
        )
    }

    #[test]
    fn rank_basics() {
        assert_eq!(RationalMatrix::identity(3).rank(), 3);
        assert_eq!(RationalMatrix::zero(4, 2).rank(), 0);
        assert_eq!(m(&[&[1, 2], &[2, 4], &[3, 6]]).rank(), 1);
        let a = m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]]);
        assert_eq!(a.rank(), 3);
        assert_eq!(a.rank(), a.transpose().rank());
    }

    #[test]
    fn kernel_of_three_web_jacobian() {
        // Jacobian of (x, y, x+y): rows d/dx, d/dy.
        let a = m(&[&[1, 0, 1], &[0, 1, 1]]);
        let basis = a.kernel_basis();
        assert_eq!(basis.len(), 1);
        let v = &basis[0];
        assert!(a.mul_vec(v).iter().all(Rational::is_zero));
        // Proportional to (-1, -1, 1).
        let scale = &v[2];
        assert!(!scale.is_zero());
        assert_eq!(v[0], -scale.clone());
        assert_eq!(v[1], -scale.clone());
    }

    #[test]
    fn kernel_count_matches_rank() {
        let a = m(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[1, 1, 1, 1]]);
        let rank = a.rank();
        let basis = a.kernel_basis();
        assert_eq!(basis.len(), a.cols() - rank);
        for v in &basis {
            assert!(a.mul_vec(v).iter().all(Rational::is_zero));
        }
        let stacked = RationalMatrix::from_rows(basis);
        assert_eq!(stacked.rank(), stacked.rows());
    }

    #[test]
    fn solve_identity_and_stacked() {
        let b = vec![rat_int(3), rat(1, 2)];
        let (x, pivots) = RationalMatrix::identity(2).solve_pivoted(&b).unwrap();
        assert_eq!(x, b);
        assert_eq!(pivots, vec![0, 1]);

        let stacked = m(&[&[1, 0], &[0, 1], &[1, 0], &[0, 1]]);
        let rhs = vec![rat_int(5), rat_int(7), rat_int(5), rat_int(7)];
        let (x, pivots) = stacked.solve_pivoted(&rhs).unwrap();
        assert_eq!(x, vec![rat_int(5), rat_int(7)]);
        assert_eq!(pivots, vec![0, 1]);
    }

    #[test]
    fn solve_rejects_rank_deficiency() {
        let a = m(&[&[1, 2], &[2, 4], &[3, 6]]);
        let rhs = vec![rat_int(1), rat_int(2), rat_int(3)];
        assert!(matches!(
            a.solve_pivoted(&rhs),
            Err(LinalgError::RankDeficient { need: 2, found: 1 })
        ));
    }

    #[test]
    fn generalized_inverse_properties() {
        let square = m(&[&[2, 1], &[1, 1]]);
        let gi = square.generalized_inverse().unwrap();
        assert_eq!(gi.mul(&square), RationalMatrix::identity(2));
        assert_eq!(square.mul(&gi), RationalMatrix::identity(2));

        let tall = m(&[&[1], &[1]]);
        let gi = tall.generalized_inverse().unwrap();
        assert_eq!(gi.rows(), 1);
        assert_eq!(*gi.get(0, 0), rat(1, 2));
        assert_eq!(*gi.get(0, 1), rat(1, 2));

        let deficient = m(&[&[1, 1], &[2, 2], &[3, 3]]);
        assert!(deficient.generalized_inverse().is_err());
    }

    fn jet_of(src: &str, vars: &[&str], coords: &[Rational], order: usize) -> Jet {
        let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let e = crate::expr::parse_expression(src, &names).unwrap();
        let base = Arc::new(Point::new(coords.to_vec()));
        eval_jet(&e, &base, order).unwrap()
    }

    #[test]
    fn jet_kernel_frame_annihilates() {
        // Rows (1, 0, 1+x) and (0, 1, y): kernel is spanned by
        // (-(1+x), -y, 1) near (0, 0).
        let vars = ["x", "y"];
        let at = [rat_int(0), rat_int(0)];
        let entries = vec![
            jet_of("1", &vars, &at, 2),
            jet_of("0", &vars, &at, 2),
            jet_of("1 + x", &vars, &at, 2),
            jet_of("0", &vars, &at, 2),
            jet_of("1", &vars, &at, 2),
            jet_of("y", &vars, &at, 2),
        ];
        let jm = JetMatrix::from_entries(2, 3, entries);
        let frame = jm.kernel_frame(2).unwrap();
        assert_eq!(frame.len(), 1);
        let v = &frame[0];
        for out in jm.mul_jet_vec(v) {
            assert!(out.is_zero());
        }
        assert_eq!(v[0], jet_of("-(1 + x)", &vars, &at, 2));
        assert_eq!(v[1], jet_of("-y", &vars, &at, 2));
        assert_eq!(v[2], jet_of("1", &vars, &at, 2));
    }

    #[test]
    fn jet_rank_errors() {
        let vars = ["x", "y"];
        let at = [rat_int(0), rat_int(0)];
        // Entry x is a nonzero jet with zero value: no unit pivot.
        let jm = JetMatrix::from_entries(1, 1, vec![jet_of("x", &vars, &at, 2)]);
        assert_eq!(jm.kernel_frame(1), Err(LinalgError::NonConstantRank));
        // A zero matrix has rank 0, not 1.
        let jm = JetMatrix::from_entries(1, 1, vec![jet_of("0", &vars, &at, 2)]);
        assert_eq!(
            jm.kernel_frame(1),
            Err(LinalgError::RankMismatch {
                expected: 1,
                found: 0
            })
        );
    }

    #[test]
    fn jet_solve_consistent_and_inconsistent() {
        let vars = ["x", "y"];
        let at = [rat_int(1), rat_int(2)];
        // (1+x)*f = (1+x)*y has the unique solution f = y; stacking a copy
        // keeps it consistent, perturbing the copy's rhs does not.
        let coeff = JetMatrix::from_entries(
            2,
            1,
            vec![jet_of("1 + x", &vars, &at, 2), jet_of("1 + x", &vars, &at, 2)],
        );
        let rhs_good = JetMatrix::from_entries(
            2,
            1,
            vec![
                jet_of("(1 + x)*y", &vars, &at, 2),
                jet_of("(1 + x)*y", &vars, &at, 2),
            ],
        );
        let sol = coeff.solve_columns(&rhs_good).unwrap();
        assert_eq!(*sol.get(0, 0), jet_of("y", &vars, &at, 2));

        let rhs_bad = JetMatrix::from_entries(
            2,
            1,
            vec![
                jet_of("(1 + x)*y", &vars, &at, 2),
                jet_of("(1 + x)*y + x", &vars, &at, 2),
            ],
        );
        assert!(matches!(
            coeff.solve_columns(&rhs_bad),
            Err(LinalgError::Inconsistent)
        ));
    }

    #[test]
    fn jet_frame_constant_terms_span_point_kernel() {
        let vars = ["x", "y"];
        let at = [rat(1, 3), rat(2, 5)];
        let entries = vec![
            jet_of("1", &vars, &at, 1),
            jet_of("x*y", &vars, &at, 1),
            jet_of("x + y", &vars, &at, 1),
            jet_of("y", &vars, &at, 1),
            jet_of("x", &vars, &at, 1),
            jet_of("1 - y", &vars, &at, 1),
        ];
        let jm = JetMatrix::from_entries(2, 3, entries);
        let value = jm.value_matrix();
        let rank = value.rank();
        let frame = jm.kernel_frame(rank).unwrap();
        let point_basis = value.kernel_basis();
        assert_eq!(frame.len(), point_basis.len());
        // Same span: stacking both bases does not raise the rank.
        let mut rows: Vec<Vec<Rational>> = frame
            .iter()
            .map(|v| v.iter().map(|j| j.value().clone()).collect())
            .collect();
        let frame_rank = RationalMatrix::from_rows(rows.clone()).rank();
        assert_eq!(frame_rank, frame.len());
        rows.extend(point_basis);
        assert_eq!(RationalMatrix::from_rows(rows).rank(), frame_rank);
    }
}
