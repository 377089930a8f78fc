//! Top-level driver for the rank analysis.
//!
//! This module turns the building blocks from [`crate::web`],
//! [`crate::linalg`], and [`crate::connection`] into the actual decision
//! procedure: draw exact rational sample points, check weak general
//! position and ordinariness, walk the sequence `h -> rho_h`, and at each
//! stationary step test the curvature of the tautological connection. The
//! scan concludes with a determined rank, a proven rank zero, or an honest
//! "inconclusive" when the level cap stops it first.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::sync::Arc;

use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::connection::curvature_vanishes;
use crate::expr::{evaluate, Expression};
use crate::jet::{eval_jet, JetError, Point};
use crate::linalg::RationalMatrix;
use crate::multi_index::{enumerate_multi_indices, monomial_count, MultiIndex};
use crate::rational::{rat, Rational};
use crate::web::{Combinatorics, PointData, WebSpec};

/// Number of draws the sampler makes before giving up on a usable point.
pub const RETRY_BUDGET: usize = 20;

/// Failure modes of the sampling and rank computations.
#[derive(Debug, Error)]
pub enum RankError {
    /// The sampler ran out of attempts while looking for a usable point.
    #[error("no usable sample point found after {0} attempts")]
    SamplingExhausted(usize),
    /// A derivative that the relation criterion divides by vanished.
    #[error("a needed first derivative vanishes at the sample point; try another point")]
    DegenerateSample,
    /// The diagonal block at the given level cannot select an invertible
    /// square, so compatibility residuals are undefined there.
    #[error("the diagonal block at level {level} lacks full column rank at the sample point")]
    DiagonalBlockDeficient { level: usize },
    /// Derivative data could not be evaluated at the point.
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Deterministic source of rational sample points.
///
/// Coordinates are drawn with numerators in `[-97, 97]` and denominators in
/// `[1, 97]`: small enough to keep exact arithmetic cheap, varied enough
/// that hitting a measure-zero degeneracy locus is a coincidence worth a
/// retry rather than a design concern.
pub struct Sampler {
    rng: ChaCha20Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Draws one point with no validity checks.
    pub fn raw_point(&mut self, n: usize) -> Point {
        let coords = (0..n)
            .map(|_| {
                let num = self.rng.gen_range(-97i64..=97);
                let den = self.rng.gen_range(1i64..=97);
                rat(num, den)
            })
            .collect();
        Point::new(coords)
    }

    /// Draws a point where every first integral is pole-free, optionally
    /// insisting on weak general position (full-rank Jacobian) as well.
    pub fn web_point(
        &mut self,
        web: &WebSpec,
        require_general_position: bool,
    ) -> Result<Arc<Point>, RankError> {
        for _ in 0..RETRY_BUDGET {
            let point = Arc::new(self.raw_point(web.n()));
            let pole_free = web
                .integrals()
                .iter()
                .all(|u| evaluate(u, point.coords()).is_ok());
            if !pole_free {
                continue;
            }
            if require_general_position
                && !matches!(check_general_position(web, &point), Ok(true))
            {
                continue;
            }
            return Ok(point);
        }
        Err(RankError::SamplingExhausted(RETRY_BUDGET))
    }

    /// Draws a full set of sample points.
    pub fn point_set(
        &mut self,
        web: &WebSpec,
        count: usize,
        require_general_position: bool,
    ) -> Result<Vec<Arc<Point>>, RankError> {
        (0..count)
            .map(|_| self.web_point(web, require_general_position))
            .collect()
    }
}

/// Tests weak general position at one point: the Jacobian of the first
/// integrals must reach the full rank `n`.
pub fn check_general_position(web: &WebSpec, base: &Arc<Point>) -> Result<bool, RankError> {
    let pd = PointData::new(web, base.clone(), 1, 0)?;
    Ok(pd.p_value(1).rank() == web.n())
}

/// Sampled ranks of the diagonal blocks, with the ordinariness verdict
/// they imply.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrdinarinessVerdict {
    /// Generic rank (max over samples) of the level-`j` diagonal block for
    /// `j = 1..=h0`, stored at index `j - 1`.
    pub p_ranks: Vec<usize>,
    /// Whether the Jacobian reaches rank `n` at the samples.
    pub weak_general_position: bool,
    /// Whether every diagonal block below level `h0` has full column rank
    /// and the level-`h0` block reaches rank `d`. From level `h0` on the
    /// blocks of an ordinary web stay at rank `d`, so nothing above `h0`
    /// needs checking.
    pub ordinary: bool,
    /// First level whose block misses the required rank, if any.
    pub first_failure: Option<usize>,
    /// Whether the sampled ranks disagreed at some level — a sign that the
    /// sample set straddles a non-generic locus.
    pub samples_disagree: bool,
}

/// Measures the diagonal-block ranks at the sample points and derives the
/// ordinariness verdict.
pub fn check_ordinary(
    web: &WebSpec,
    points: &[Arc<Point>],
) -> Result<OrdinarinessVerdict, RankError> {
    assert!(!points.is_empty(), "need at least one sample point");
    let h0 = web.combinatorics().h0;
    let mut per_sample: Vec<Vec<usize>> = Vec::with_capacity(points.len());
    for base in points {
        let pd = PointData::new(web, base.clone(), h0, 0)?;
        per_sample.push((1..=h0).map(|j| pd.p_value(j).rank()).collect());
    }
    let p_ranks: Vec<usize> = (0..h0)
        .map(|idx| per_sample.iter().map(|ranks| ranks[idx]).max().unwrap())
        .collect();
    let samples_disagree = per_sample.iter().any(|ranks| ranks != &p_ranks);
    let mut first_failure = None;
    for j in 1..=h0 {
        let required = if j < h0 {
            monomial_count(web.n(), j)
        } else {
            web.d()
        };
        if p_ranks[j - 1] != required {
            first_failure = Some(j);
            break;
        }
    }
    Ok(OrdinarinessVerdict {
        weak_general_position: p_ranks[0] == web.n(),
        ordinary: first_failure.is_none(),
        first_failure,
        samples_disagree,
        p_ranks,
    })
}

/// One level of the rank sequence: the defect together with the sampled
/// ranks it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoSample {
    /// The level `h`.
    pub h: usize,
    /// `rho_h = (h+1)d - rank(level-(h+1) matrix)`.
    pub rho: usize,
    /// Generic rank of the level-`(h+1)` matrix (max over samples).
    pub m_rank: usize,
    /// Per-sample ranks, in sample order.
    pub per_sample: Vec<usize>,
}

/// Computes `rho_h` from exact ranks at the sample points, taking the
/// maximum across samples as the generic rank.
pub fn rho(
    web: &WebSpec,
    h: usize,
    points: &[Arc<Point>],
    jobs: usize,
) -> Result<RhoSample, RankError> {
    assert!(!points.is_empty(), "need at least one sample point");
    let ranks = map_points(points, jobs, |base| {
        PointData::new(web, base.clone(), h + 1, 0).map(|pd| pd.m_script_value(h + 1).rank())
    });
    let mut per_sample = Vec::with_capacity(ranks.len());
    for rank in ranks {
        per_sample.push(rank?);
    }
    let m_rank = *per_sample.iter().max().unwrap();
    Ok(RhoSample {
        h,
        rho: (h + 1) * web.d() - m_rank,
        m_rank,
        per_sample,
    })
}

/// Applies `f` to every point, fanning the work across at most `jobs`
/// threads. Results keep sample order.
fn map_points<T, F>(points: &[Arc<Point>], jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&Arc<Point>) -> T + Sync,
{
    let jobs = jobs.max(1).min(points.len());
    if jobs <= 1 {
        return points.iter().map(f).collect();
    }
    let chunk = points.len().div_ceil(jobs);
    let mut slots: Vec<Option<T>> = std::iter::repeat_with(|| None).take(points.len()).collect();
    std::thread::scope(|scope| {
        for (band, out) in points.chunks(chunk).zip(slots.chunks_mut(chunk)) {
            let f = &f;
            scope.spawn(move || {
                for (point, slot) in band.iter().zip(out.iter_mut()) {
                    *slot = Some(f(point));
                }
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.expect("worker filled every slot"))
        .collect()
}

/// Builds the compatibility-residual matrix of the level-`h` systems for a
/// trivialization of the level-`(h-1)` kernel: one row per kernel section,
/// one column per row of the level-`(h+1)` diagonal block left out of the
/// selected invertible square. The kernel of the next level drops exactly
/// where these residuals are independent, so
/// `rho_h = rho_{h-1} - rank(residuals)`.
pub fn char_determinant(
    pd: &PointData,
    h: usize,
    sections: &[Vec<Rational>],
) -> Result<RationalMatrix, RankError> {
    assert!(h >= 1, "compatibility residuals need level >= 1");
    let p = pd.p_value(h + 1);
    let q = pd.q_value(h + 1);
    let mut residual_rows: Vec<Vec<Rational>> = Vec::with_capacity(sections.len());
    let mut deleted_rows: Option<Vec<usize>> = None;
    for section in sections {
        assert_eq!(
            section.len(),
            q.cols(),
            "section length must match the level-matrix width"
        );
        let rhs: Vec<Rational> = q.mul_vec(section).into_iter().map(|v| -v).collect();
        let (solution, pivot_rows) = p
            .solve_pivoted(&rhs)
            .map_err(|_| RankError::DiagonalBlockDeficient { level: h + 1 })?;
        let deleted = deleted_rows.get_or_insert_with(|| {
            (0..p.rows())
                .filter(|row| !pivot_rows.contains(row))
                .collect()
        });
        let reconstructed = p.mul_vec(&solution);
        residual_rows.push(
            deleted
                .iter()
                .map(|&row| reconstructed[row].clone() - &rhs[row])
                .collect(),
        );
    }
    if residual_rows.is_empty() {
        return Ok(RationalMatrix::zero(0, 0));
    }
    Ok(RationalMatrix::from_rows(residual_rows))
}

/// Computes `rho_h` by the residual route: trivialize the level-`(h-1)`
/// kernel at one point, push each section through the level-`(h+1)`
/// systems, and subtract the rank of the residual matrix. Needs the
/// diagonal block at level `h+1` to have full column rank, which holds at
/// generic points once `h + 1 >= h0`.
pub fn rho_via_char_determinants(
    web: &WebSpec,
    h: usize,
    base: &Arc<Point>,
) -> Result<usize, RankError> {
    assert!(h >= 1, "compatibility residuals need level >= 1");
    let pd = PointData::new(web, base.clone(), h + 1, 0)?;
    let sections = pd.m_script_value(h).kernel_basis();
    let delta = char_determinant(&pd, h, &sections)?;
    Ok(sections.len() - delta.rank())
}

/// Decides whether the `(n+1)`-web cut out by the coordinate functions
/// together with `f` carries a nontrivial relation among its foliations.
/// The test is the exact proportionality of second derivatives,
/// `f''_{ik} * f'_j = f''_{jk} * f'_i` for all distinct `i, j, k`, checked
/// at every sample point.
pub fn coordinate_web_has_relation(
    f: &Expression,
    n: usize,
    points: &[Arc<Point>],
) -> Result<bool, RankError> {
    assert!(n >= 3, "the criterion needs at least three variables");
    assert!(!points.is_empty(), "need at least one sample point");
    for base in points {
        assert_eq!(base.n(), n, "point dimension must match the variable count");
        let jet = eval_jet(f, base, 2)?;
        let first: Vec<&Rational> = (0..n)
            .map(|i| jet.coeff(&MultiIndex::unit(n, i)))
            .collect();
        if first.iter().any(|v| v.is_zero()) {
            return Err(RankError::DegenerateSample);
        }
        let second = |i: usize, k: usize| jet.coeff(&MultiIndex::unit(n, i).plus(k));
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (0..n).filter(|&k| k != i && k != j) {
                    if second(i, k) * first[j] != second(j, k) * first[i] {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Tuning knobs for [`analyze_rank`].
#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    /// Highest level scanned before giving up; `None` means `h0 + 8`.
    pub max_level: Option<usize>,
    /// Number of sample points to draw.
    pub samples: usize,
    /// Seed for the point sampler.
    pub seed: u64,
    /// Evaluate at this single point instead of sampling; no resampling
    /// happens in this mode.
    pub fixed_point: Option<Point>,
    /// Worker threads for the per-sample computations.
    pub jobs: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            max_level: None,
            samples: 3,
            seed: 0,
            fixed_point: None,
            jobs: 1,
        }
    }
}

/// Outcome class of an analysis run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// The sequence went stationary with vanishing curvature; the value is
    /// the rank of the web.
    RankDetermined,
    /// The sequence hit zero, so the web has no relations at all.
    RankZero,
    /// The level cap or a sampling failure stopped the scan first.
    Inconclusive,
}

/// What happened to the curvature test at one level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurvatureVerdict {
    /// The curvature vanished at every sample point.
    Vanishes,
    /// The curvature was nonzero at some sample point.
    Nonzero,
    /// Skipped: the sequence drops one level later, which already proves
    /// the curvature nonzero.
    SkippedProfileDrop,
    /// Skipped: the next diagonal block misses full column rank, so the
    /// one-level lift behind the connection is not determined.
    SkippedProjectionNotInjective,
}

/// The computed part of the rank sequence, level by level from 0.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankProfile {
    /// `rho_h` for `h = 0..len`.
    pub rho: Vec<usize>,
    /// Generic rank of the level-`(h+1)` matrix behind each entry.
    pub m_ranks: Vec<usize>,
    /// Per-sample ranks for each level (outer index = level).
    pub per_sample_m_ranks: Vec<Vec<usize>>,
}

/// Everything [`analyze_rank`] learned, in one bundle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisReport {
    pub combinatorics: Combinatorics,
    /// Missing only when no usable sample point existed at all.
    pub ordinariness: Option<OrdinarinessVerdict>,
    pub profile: RankProfile,
    /// Curvature verdicts in level order; levels without a stationarity
    /// test simply do not appear.
    pub curvature: Vec<(usize, CurvatureVerdict)>,
    pub status: Status,
    /// The determined rank when the status grants one (0 for rank zero).
    pub rank: Option<usize>,
    /// Level at which the determination happened.
    pub determined_level: Option<usize>,
    /// Level cap that was in force.
    pub h_max: usize,
    /// Seed the sampler ran with.
    pub seed: u64,
    /// The sample points actually used.
    pub points: Vec<Arc<Point>>,
    pub warnings: Vec<String>,
    /// Extra explanation attached to the conclusion, when one applies.
    pub justification: Option<String>,
}

/// Runs the full decision procedure on a web.
///
/// The scan starts at level `h0 - 2` for ordinary webs (below that the
/// sequence is forced combinatorially) and at level 0 otherwise. At each
/// level it compares `rho_h` with `rho_{h+1}`: a drop just advances; a
/// stationary step peeks one level further (a later drop proves the
/// curvature nonzero for free), then checks that the next diagonal block
/// has full column rank, and finally computes the curvature. Vanishing
/// curvature on a stationary step determines the rank; on the
/// non-ordinary path a stationary zero is also accepted as rank zero.
/// Every failure mode lands in the report rather than an error.
pub fn analyze_rank(web: &WebSpec, options: &AnalyzeOptions) -> AnalysisReport {
    let combinatorics = web.combinatorics();
    let h_max = options.max_level.unwrap_or(combinatorics.h0 + 8);
    let jobs = options.jobs.max(1);
    let mut warnings: Vec<String> = Vec::new();

    let points = gather_points(web, options, &mut warnings);
    let mut report = AnalysisReport {
        combinatorics,
        ordinariness: None,
        profile: RankProfile::default(),
        curvature: Vec::new(),
        status: Status::Inconclusive,
        rank: None,
        determined_level: None,
        h_max,
        seed: options.seed,
        points,
        warnings,
        justification: None,
    };
    if report.points.is_empty() {
        return report;
    }

    let ordinariness = match check_ordinary(web, &report.points) {
        Ok(verdict) => verdict,
        Err(e) => {
            report.warnings.push(format!("ordinariness check failed: {e}"));
            return report;
        }
    };
    if ordinariness.samples_disagree {
        report.warnings.push(
            "sampled diagonal-block ranks disagree across points; treating the maxima as generic"
                .to_string(),
        );
    }
    let ordinary = ordinariness.ordinary;
    let weak_gp = ordinariness.weak_general_position;
    report.ordinariness = Some(ordinariness);
    if !weak_gp {
        report.warnings.push(
            "the samples never reach full Jacobian rank; the analysis needs weak general position"
                .to_string(),
        );
        return report;
    }

    let mut memo: BTreeMap<usize, RhoSample> = BTreeMap::new();
    scan_levels(web, &mut report, &mut memo, ordinary, jobs);

    // Lay the memoized sequence out as a contiguous profile from level 0.
    for h in 0.. {
        let Some(sample) = memo.get(&h) else { break };
        report.profile.rho.push(sample.rho);
        report.profile.m_ranks.push(sample.m_rank);
        report.profile.per_sample_m_ranks.push(sample.per_sample.clone());
    }
    let disagreeing: Vec<usize> = (0..report.profile.rho.len())
        .filter(|&h| {
            report.profile.per_sample_m_ranks[h]
                .iter()
                .any(|&r| r != report.profile.m_ranks[h])
        })
        .collect();
    if !disagreeing.is_empty() {
        report.warnings.push(format!(
            "sampled level-matrix ranks disagree at levels {disagreeing:?}; \
             treating the maxima as generic"
        ));
    }

    if !ordinary
        && report.status != Status::Inconclusive
        && integrals_affine_at(web, &report.points)
    {
        report.justification = Some(
            "every first integral is affine at the sampled points, so the level matrices are \
             block-triangular with constant diagonal blocks; once the diagonal blocks reach full \
             column rank the rank sequence is stationary from there on"
                .to_string(),
        );
    }
    report
}

/// Picks the evaluation points: the fixed point when one is given (hard
/// requirement, never resampled), otherwise seeded random points in weak
/// general position, falling back to merely pole-free points for
/// diagnosis when general position cannot be hit.
fn gather_points(
    web: &WebSpec,
    options: &AnalyzeOptions,
    warnings: &mut Vec<String>,
) -> Vec<Arc<Point>> {
    if let Some(fixed) = &options.fixed_point {
        let point = Arc::new(fixed.clone());
        if point.n() != web.n() {
            warnings.push(format!(
                "the fixed evaluation point has {} coordinates but the web has {} variables",
                point.n(),
                web.n()
            ));
            return Vec::new();
        }
        let pole_free = web
            .integrals()
            .iter()
            .all(|u| evaluate(u, point.coords()).is_ok());
        if !pole_free {
            warnings
                .push("the fixed evaluation point is a pole of a first integral".to_string());
            return Vec::new();
        }
        return vec![point];
    }
    let mut sampler = Sampler::new(options.seed);
    let count = options.samples.max(1);
    match sampler.point_set(web, count, true) {
        Ok(points) => points,
        Err(_) => match sampler.point_set(web, count, false) {
            Ok(points) => {
                warnings.push(format!(
                    "no sample point reached full Jacobian rank within {RETRY_BUDGET} draws \
                     per point; continuing with pole-free points"
                ));
                points
            }
            Err(_) => {
                warnings.push(format!(
                    "could not find pole-free sample points within {RETRY_BUDGET} draws per point"
                ));
                Vec::new()
            }
        },
    }
}

/// Fetches `rho` at one level through the memo table.
fn rho_level(
    memo: &mut BTreeMap<usize, RhoSample>,
    web: &WebSpec,
    level: usize,
    points: &[Arc<Point>],
    jobs: usize,
) -> Result<usize, RankError> {
    if let Entry::Vacant(slot) = memo.entry(level) {
        slot.insert(rho(web, level, points, jobs)?);
    }
    Ok(memo[&level].rho)
}

/// Generic rank of the level-`j` diagonal block over the sample points.
fn diagonal_block_rank(
    web: &WebSpec,
    j: usize,
    points: &[Arc<Point>],
    jobs: usize,
) -> Result<usize, RankError> {
    let ranks = map_points(points, jobs, |base| {
        PointData::new(web, base.clone(), j, 0).map(|pd| pd.p_value(j).rank())
    });
    let mut best = 0;
    for rank in ranks {
        best = best.max(rank?);
    }
    Ok(best)
}

/// The level scan at the heart of [`analyze_rank`]; mutates the report's
/// status, curvature log, and warnings in place.
fn scan_levels(
    web: &WebSpec,
    report: &mut AnalysisReport,
    memo: &mut BTreeMap<usize, RhoSample>,
    ordinary: bool,
    jobs: usize,
) {
    let start = if ordinary {
        report.combinatorics.h0 - 2
    } else {
        0
    };
    // Record the forced part of the sequence below the starting level.
    for h in 0..start {
        if let Err(e) = rho_level(memo, web, h, &report.points, jobs) {
            report
                .warnings
                .push(format!("rank computation failed at level {h}: {e}"));
            return;
        }
    }
    let mut h = start;
    loop {
        if h > report.h_max {
            report.warnings.push(format!(
                "level cap {} reached before the sequence stabilized",
                report.h_max
            ));
            return;
        }
        let r_here = match rho_level(memo, web, h, &report.points, jobs) {
            Ok(r) => r,
            Err(e) => {
                report
                    .warnings
                    .push(format!("rank computation failed at level {h}: {e}"));
                return;
            }
        };
        if r_here == 0 && ordinary {
            report.status = Status::RankZero;
            report.rank = Some(0);
            report.determined_level = Some(h);
            return;
        }
        let r_next = match rho_level(memo, web, h + 1, &report.points, jobs) {
            Ok(r) => r,
            Err(e) => {
                report
                    .warnings
                    .push(format!("rank computation failed at level {}: {e}", h + 1));
                return;
            }
        };
        if r_here == 0 && r_next == 0 {
            // Non-ordinary path: a stationary zero really is zero.
            report.status = Status::RankZero;
            report.rank = Some(0);
            report.determined_level = Some(h);
            return;
        }
        if r_next != r_here {
            if r_next > r_here && ordinary {
                report.warnings.push(format!(
                    "rank sequence increased from level {h} to level {}; \
                     sample points may be non-generic",
                    h + 1
                ));
            }
            h += 1;
            continue;
        }
        // Stationary step. Peek one level further first: a later drop
        // already proves the curvature nonzero, no need to compute it.
        let r_peek = match rho_level(memo, web, h + 2, &report.points, jobs) {
            Ok(r) => r,
            Err(e) => {
                report
                    .warnings
                    .push(format!("rank computation failed at level {}: {e}", h + 2));
                return;
            }
        };
        if r_peek < r_next {
            report.curvature.push((h, CurvatureVerdict::SkippedProfileDrop));
            h += 1;
            continue;
        }
        // The connection needs a one-level lift, which requires the next
        // diagonal block to reach full column rank.
        match diagonal_block_rank(web, h + 2, &report.points, jobs) {
            Ok(rank) if rank == web.d() => {}
            Ok(_) => {
                report
                    .curvature
                    .push((h, CurvatureVerdict::SkippedProjectionNotInjective));
                h += 1;
                continue;
            }
            Err(e) => {
                report
                    .warnings
                    .push(format!("diagonal-block rank failed at level {}: {e}", h + 2));
                return;
            }
        }
        match curvature_vanishes(web, h, &report.points) {
            Ok((true, _)) => {
                report.curvature.push((h, CurvatureVerdict::Vanishes));
                report.status = Status::RankDetermined;
                report.rank = Some(r_here);
                report.determined_level = Some(h);
                return;
            }
            Ok((false, _)) => {
                report.curvature.push((h, CurvatureVerdict::Nonzero));
                h += 1;
            }
            Err(e) => {
                report
                    .warnings
                    .push(format!("curvature computation failed at level {h}: {e}"));
                return;
            }
        }
    }
}

/// Whether every first integral looks affine at the sample points (all
/// second derivatives vanish there exactly).
fn integrals_affine_at(web: &WebSpec, points: &[Arc<Point>]) -> bool {
    let quadratic = enumerate_multi_indices(web.n(), 2);
    points.iter().all(|base| {
        let Ok(pd) = PointData::new(web, base.clone(), 2, 0) else {
            return false;
        };
        (0..web.d()).all(|i| {
            let table = pd.table(i);
            quadratic.iter().all(|l| table.value(l, 0).is_zero())
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::rational::rat_int;

    fn web(vars: &[&str], integrals: &[&str]) -> WebSpec {
        let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let exprs = integrals
            .iter()
            .map(|s| parse_expression(s, &names).unwrap())
            .collect();
        WebSpec::new(names, exprs).unwrap()
    }

    fn sample_points(web: &WebSpec, count: usize, seed: u64) -> Vec<Arc<Point>> {
        Sampler::new(seed)
            .point_set(web, count, true)
            .expect("sampling should succeed on a generic web")
    }

    fn int_point(coords: &[i64]) -> Arc<Point> {
        Arc::new(Point::new(coords.iter().map(|&c| rat_int(c)).collect()))
    }

    #[test]
    fn sampler_is_deterministic() {
        let a: Vec<Point> = {
            let mut s = Sampler::new(42);
            (0..5).map(|_| s.raw_point(3)).collect()
        };
        let b: Vec<Point> = {
            let mut s = Sampler::new(42);
            (0..5).map(|_| s.raw_point(3)).collect()
        };
        assert_eq!(a, b);
        let c = Sampler::new(43).raw_point(3);
        assert_ne!(a[0], c);
    }

    #[test]
    fn general_position_detects_aligned_tangents() {
        let straight = web(&["x", "y"], &["x", "y", "x+y"]);
        let points = sample_points(&straight, 2, 1);
        for p in &points {
            assert!(check_general_position(&straight, p).unwrap());
        }
        // All three integrals depend on x alone: every tangent is dx.
        let collapsed = web(&["x", "y"], &["x", "x^2", "x^3"]);
        let p = int_point(&[2, 5]);
        assert!(!check_general_position(&collapsed, &p).unwrap());
    }

    #[test]
    fn planar_web_is_ordinary() {
        let w = web(&["x", "y"], &["x", "y", "x+y+x*y", "x-y+x^5"]);
        let points = sample_points(&w, 2, 7);
        let verdict = check_ordinary(&w, &points).unwrap();
        assert_eq!(verdict.p_ranks, vec![2, 3, 4]);
        assert!(verdict.weak_general_position);
        assert!(verdict.ordinary);
        assert_eq!(verdict.first_failure, None);
    }

    #[test]
    fn parallel_ten_web_is_not_ordinary() {
        let w = web(
            &["x", "y", "z"],
            &[
                "x", "y", "z", "x+y+z", "x+2*y+z", "x+3*y+z", "x+y+5*z", "x+y+7*z", "x+11*y+z",
                "19*x+y+z",
            ],
        );
        let points = sample_points(&w, 2, 3);
        let verdict = check_ordinary(&w, &points).unwrap();
        assert_eq!(verdict.p_ranks, vec![3, 6, 9]);
        assert!(verdict.weak_general_position);
        assert!(!verdict.ordinary);
        assert_eq!(verdict.first_failure, Some(3));
    }

    #[test]
    fn rho_profile_of_planar_five_integral_web() {
        let w = web(&["x", "y"], &["x", "y", "x+y+x*y", "x-y+x^5"]);
        let points = sample_points(&w, 3, 11);
        let values: Vec<usize> = (0..=4)
            .map(|h| rho(&w, h, &points, 1).unwrap().rho)
            .collect();
        assert_eq!(values, vec![2, 3, 3, 2, 2]);
    }

    #[test]
    fn char_determinant_route_agrees_with_kernel_route() {
        let w = web(&["x", "y"], &["x", "y", "x+y+x*y", "x-y+x^5"]);
        let points = sample_points(&w, 1, 13);
        // Square-block level: no rows are deleted, so the value carries over.
        assert_eq!(rho_via_char_determinants(&w, 2, &points[0]).unwrap(), 3);
        // Proper residual level.
        assert_eq!(rho_via_char_determinants(&w, 3, &points[0]).unwrap(), 2);
        assert_eq!(rho(&w, 3, &points, 1).unwrap().rho, 2);
    }

    #[test]
    fn analyze_flat_three_web() {
        let w = web(&["x", "y"], &["x", "y", "x+y"]);
        let report = analyze_rank(&w, &AnalyzeOptions::default());
        assert_eq!(report.status, Status::RankDetermined);
        assert_eq!(report.rank, Some(1));
        assert_eq!(report.determined_level, Some(0));
        assert_eq!(report.profile.rho, vec![1, 1, 1]);
        assert_eq!(report.curvature, vec![(0, CurvatureVerdict::Vanishes)]);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn analyze_relationless_web_hits_zero() {
        let w = web(&["x", "y", "z"], &["x", "y", "z", "x^2*y+z"]);
        let report = analyze_rank(&w, &AnalyzeOptions::default());
        assert_eq!(report.status, Status::RankZero);
        assert_eq!(report.rank, Some(0));
        assert_eq!(report.profile.rho, vec![1, 0]);
        assert!(report.curvature.is_empty());
    }

    #[test]
    fn analyze_respects_level_cap() {
        let w = web(&["x", "y"], &["x", "y", "x+y+x^2*y"]);
        let options = AnalyzeOptions {
            max_level: Some(0),
            ..AnalyzeOptions::default()
        };
        let report = analyze_rank(&w, &options);
        assert_eq!(report.status, Status::Inconclusive);
        assert_eq!(report.rank, None);
        assert_eq!(report.profile.rho, vec![1, 1, 0]);
        assert_eq!(
            report.curvature,
            vec![(0, CurvatureVerdict::SkippedProfileDrop)]
        );
        assert!(!report.warnings.is_empty());
    }

    #[test]
    fn analyze_at_fixed_point() {
        let w = web(&["x", "y"], &["x", "y", "x+y"]);
        let options = AnalyzeOptions {
            fixed_point: Some(Point::new(vec![rat_int(1), rat_int(2)])),
            ..AnalyzeOptions::default()
        };
        let report = analyze_rank(&w, &options);
        assert_eq!(report.status, Status::RankDetermined);
        assert_eq!(report.rank, Some(1));
        assert_eq!(report.points.len(), 1);
    }

    #[test]
    fn analyze_rejects_fixed_pole() {
        let w = web(&["x", "y"], &["x", "y", "1/(x-1)"]);
        let options = AnalyzeOptions {
            fixed_point: Some(Point::new(vec![rat_int(1), rat_int(5)])),
            ..AnalyzeOptions::default()
        };
        let report = analyze_rank(&w, &options);
        assert_eq!(report.status, Status::Inconclusive);
        assert!(report.points.is_empty());
        assert!(report
            .warnings
            .iter()
            .any(|w| w.contains("pole")));
    }

    #[test]
    fn analyze_is_deterministic() {
        let w = web(&["x", "y"], &["x", "y", "x+y+x*y", "x-y+x^5"]);
        let a = analyze_rank(&w, &AnalyzeOptions::default());
        let b = analyze_rank(&w, &AnalyzeOptions::default());
        assert_eq!(a, b);
    }

    #[test]
    fn relation_criterion_on_products_and_sums() {
        let vars: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let points = vec![int_point(&[1, 2, 3]), int_point(&[2, 3, 5])];
        let cases = [
            ("x*y*z", true),
            ("x+y+z", true),
            ("x^2+y^2+z^2", true),
            ("x^2*y+z", false),
        ];
        for (src, expected) in cases {
            let f = parse_expression(src, &vars).unwrap();
            assert_eq!(
                coordinate_web_has_relation(&f, 3, &points).unwrap(),
                expected,
                "criterion mismatch for {src}"
            );
        }
    }

    #[test]
    fn relation_criterion_flags_degenerate_points() {
        let vars: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let f = parse_expression("x*y*z", &vars).unwrap();
        let origin = vec![int_point(&[0, 1, 1])];
        assert!(matches!(
            coordinate_web_has_relation(&f, 3, &origin),
            Err(RankError::DegenerateSample)
        ));
    }

    #[test]
    fn parallel_jobs_match_sequential() {
        let w = web(&["x", "y"], &["x", "y", "x+y+x*y", "x-y+x^5"]);
        let points = sample_points(&w, 3, 11);
        let seq = rho(&w, 3, &points, 1).unwrap();
        let par = rho(&w, 3, &points, 3).unwrap();
        assert_eq!(seq, par);
    }
}
