//! The tautological connection on the space of formal relations, and its
//! curvature.
//!
//! When the rank sequence goes stationary at level `h` (`rho_h = rho_{h+1}`),
//! projecting a level-`(h+1)` relation down to level `h` is an isomorphism,
//! so every level-`h` relation extends uniquely by one more derivative
//! order. That unique extension defines a connection: for a section
//! `sigma = (f^(0), ..., f^(h))` of the kernel bundle, the top component
//! `f^(h+1)` is solved from the next band of linear conditions, and
//!
//! ```text
//! (nabla_lambda sigma)_i^(m) = d_lambda f_i^(m) - f_i^(m+1) (u_i)'_lambda
//! ```
//!
//! measures the failure of `sigma` to be the jet tuple of an actual
//! relation. Genuine relations are exactly the flat sections, so if the
//! curvature of this connection vanishes the stationary value `rho_h` is
//! the true rank. Everything here works with jets: frames of the kernel
//! bundle carry order-2 Taylor data so that the connection form keeps
//! order 1 and the curvature can still take one derivative.

use crate::jet::{Jet, JetError, Point};
use crate::linalg::{JetMatrix, LinalgError, RationalMatrix};
use crate::multi_index::MultiIndex;
use crate::web::{PointData, WebSpec};
use std::sync::Arc;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ConnectionError {
    #[error("the level-{level} projection is not injective at this point (diagonal block short of full column rank)")]
    ProjectionNotInjective { level: usize },
    #[error("no unique extension: the section does not lift one more order (rank sequence not stationary here)")]
    LiftObstructed,
    #[error("covariant derivative leaves the frame span: rank misdetection")]
    FrameExpansionFailed,
    #[error("rank drops at the sampled base point; resample ({0})")]
    NonGenericPoint(LinalgError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// A local frame of the level-`h` kernel bundle: `rho_h` jet vectors in the
/// `(h+1)d` ambient coordinates, each annihilated by the level-`(h+1)`
/// prolongation matrix over the jet ring.
pub struct SectionFrame {
    h: usize,
    base: Arc<Point>,
    sections: Vec<Vec<Jet>>,
}

impl SectionFrame {
    /// Wraps explicitly given kernel sections after verifying that each one
    /// is annihilated by the level-`(h+1)` matrix exactly, coefficient-wise
    /// at the sections' jet order.
    pub fn from_vectors(
        pd: &PointData,
        h: usize,
        sections: Vec<Vec<Jet>>,
    ) -> Result<SectionFrame, ConnectionError> {
        assert!(!sections.is_empty(), "a frame needs at least one section");
        let order = sections[0][0].order();
        let m = pd.m_script_jet(h + 1, order);
        for sigma in &sections {
            assert_eq!(sigma.len(), m.cols(), "section length must be (h+1)d");
            if m.mul_jet_vec(sigma).iter().any(|j| !j.is_zero()) {
                return Err(ConnectionError::FrameExpansionFailed);
            }
        }
        Ok(SectionFrame {
            h,
            base: pd.base().clone(),
            sections,
        })
    }

    /// The deterministic elimination frame of the level-`(h+1)` kernel at
    /// this point, with order-2 jet entries. `expected_rank` is the generic
    /// rank of the level-`(h+1)` matrix; a mismatch at this point signals a
    /// non-generic sample.
    pub fn compute(
        pd: &PointData,
        h: usize,
        expected_rank: usize,
    ) -> Result<SectionFrame, ConnectionError> {
        let m = pd.m_script_jet(h + 1, 2);
        let sections = m
            .kernel_frame(expected_rank)
            .map_err(ConnectionError::NonGenericPoint)?;
        Ok(SectionFrame {
            h,
            base: pd.base().clone(),
            sections,
        })
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn base(&self) -> &Arc<Point> {
        &self.base
    }

    pub fn sections(&self) -> &[Vec<Jet>] {
        &self.sections
    }

    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }
}

/// Solves for the unique top components extending each frame section one
/// derivative order: the `d x rho` jet matrix `F` with
/// `P_{h+2} F = -Q_{h+2} S`, verified against *all* band rows — a nonzero
/// residual means the extension does not exist and the rank sequence is not
/// stationary at `h` after all.
pub fn lift_sections(pd: &PointData, frame: &SectionFrame) -> Result<JetMatrix, ConnectionError> {
    let h = frame.h;
    let p = pd.p_jet(h + 2, 1);
    let q = pd.q_jet(h + 2, 1);
    let truncated: Vec<Vec<Jet>> = frame
        .sections
        .iter()
        .map(|sigma| sigma.iter().map(|j| j.truncated(1)).collect())
        .collect();
    let s = JetMatrix::from_columns(&truncated);
    let rhs = q.mul(&s).neg();
    p.solve_columns(&rhs).map_err(|e| match e {
        LinalgError::RankDeficient { .. } => {
            ConnectionError::ProjectionNotInjective { level: h + 2 }
        }
        LinalgError::Inconsistent => ConnectionError::LiftObstructed,
        other => ConnectionError::NonGenericPoint(other),
    })
}

/// The covariant derivative of one section in one coordinate direction:
/// componentwise jet derivative minus the chain-rule prediction, using
/// `lift_top` as the section's order-`(h+1)` components. The result is one
/// order lower than the inputs.
pub fn covariant_derivative(
    pd: &PointData,
    h: usize,
    sigma: &[Jet],
    lift_top: &[Jet],
    lambda: usize,
) -> Vec<Jet> {
    let d = lift_top.len();
    assert_eq!(sigma.len(), (h + 1) * d, "section length must be (h+1)d");
    let order = sigma[0].order() - 1;
    (0..(h + 1) * d)
        .map(|c| {
            let (m, i) = (c / d, c % d);
            let next = if m < h {
                sigma[(m + 1) * d + i].truncated(order)
            } else {
                lift_top[i].truncated(order)
            };
            let du = pd
                .table(i)
                .jet(&MultiIndex::unit(pd.base().n(), lambda), 0)
                .truncated(order);
            sigma[c].derivative(lambda).sub(&next.mul(&du))
        })
        .collect()
}

/// The connection form in a frame: `omega[lambda]` is the `rho x rho`
/// matrix of order-1 jets with `nabla_lambda sigma_s = sum_t
/// omega[lambda][t,s] sigma_t`, obtained from one elimination over the jet
/// ring with all right-hand sides at once.
pub struct ConnectionData {
    pub h: usize,
    pub omega: Vec<JetMatrix>,
}

pub fn connection_form(
    pd: &PointData,
    frame: &SectionFrame,
    lifts: &JetMatrix,
) -> Result<ConnectionData, ConnectionError> {
    let n = pd.base().n();
    let rho = frame.len();
    let truncated: Vec<Vec<Jet>> = frame
        .sections
        .iter()
        .map(|sigma| sigma.iter().map(|j| j.truncated(1)).collect())
        .collect();
    let s = JetMatrix::from_columns(&truncated);
    let mut rhs_columns: Vec<Vec<Jet>> = Vec::with_capacity(n * rho);
    for lambda in 0..n {
        for (t, sigma) in frame.sections.iter().enumerate() {
            let lift_top: Vec<Jet> = (0..lifts.rows()).map(|i| lifts.get(i, t).clone()).collect();
            rhs_columns.push(covariant_derivative(pd, frame.h, sigma, &lift_top, lambda));
        }
    }
    let rhs = JetMatrix::from_columns(&rhs_columns);
    let solution = s.solve_columns(&rhs).map_err(|e| match e {
        LinalgError::Inconsistent => ConnectionError::FrameExpansionFailed,
        other => ConnectionError::NonGenericPoint(other),
    })?;
    let omega = (0..n)
        .map(|lambda| {
            JetMatrix::from_fn(rho, rho, |t, sc| solution.get(t, lambda * rho + sc).clone())
        })
        .collect();
    Ok(ConnectionData { h: frame.h, omega })
}

/// The curvature of a connection form at the base point: for each pair
/// `lambda < mu` the value matrix of
/// `d_lambda omega_mu - d_mu omega_lambda + omega_lambda omega_mu -
/// omega_mu omega_lambda`. The section bundle admits a flat structure at
/// this point only if every component vanishes.
pub struct CurvatureReport {
    pub h: usize,
    pub components: Vec<(usize, usize, RationalMatrix)>,
    pub vanishes: bool,
}

pub fn curvature(conn: &ConnectionData) -> CurvatureReport {
    let n = conn.omega.len();
    let rho = conn.omega[0].rows();
    let deriv_value = |m: &JetMatrix, lambda: usize| {
        RationalMatrix::from_fn(rho, rho, |r, c| m.get(r, c).derivative(lambda).value().clone())
    };
    let mut components = Vec::new();
    let mut vanishes = true;
    for lambda in 0..n {
        for mu in (lambda + 1)..n {
            let ol = conn.omega[lambda].value_matrix();
            let om = conn.omega[mu].value_matrix();
            let k = deriv_value(&conn.omega[mu], lambda)
                .sub(&deriv_value(&conn.omega[lambda], mu))
                .add(&ol.mul(&om))
                .sub(&om.mul(&ol));
            if !k.is_zero() {
                vanishes = false;
            }
            components.push((lambda, mu, k));
        }
    }
    CurvatureReport {
        h: conn.h,
        components,
        vanishes,
    }
}

/// Runs the whole connection pipeline at one point: frame the level-`h`
/// kernel, lift, build the connection form, and evaluate the curvature.
/// `m_rank` is the generic rank of the level-`(h+1)` prolongation matrix.
pub fn curvature_at_point(
    web: &WebSpec,
    h: usize,
    m_rank: usize,
    base: Arc<Point>,
) -> Result<CurvatureReport, ConnectionError> {
    let pd = PointData::new(web, base, h + 2, 2)?;
    let frame = SectionFrame::compute(&pd, h, m_rank)?;
    let lifts = lift_sections(&pd, &frame)?;
    let conn = connection_form(&pd, &frame, &lifts)?;
    Ok(curvature(&conn))
}

/// Evidence that the curvature at level `h` vanishes: exact zero at every
/// given sample point. The generic rank of the level-`(h+1)` matrix is
/// taken as the maximum over the sample points.
pub fn curvature_vanishes(
    web: &WebSpec,
    h: usize,
    points: &[Arc<Point>],
) -> Result<(bool, Vec<CurvatureReport>), ConnectionError> {
    assert!(!points.is_empty(), "need at least one sample point");
    let mut m_rank = 0;
    for base in points {
        let pd = PointData::new(web, base.clone(), h + 1, 0)?;
        m_rank = m_rank.max(pd.m_script_value(h + 1).rank());
    }
    let mut reports = Vec::with_capacity(points.len());
    let mut all = true;
    for base in points {
        let report = curvature_at_point(web, h, m_rank, base.clone())?;
        all &= report.vanishes;
        reports.push(report);
    }
    Ok((all, reports))
}
