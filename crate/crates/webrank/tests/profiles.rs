//! End-to-end pins for a corpus of webs whose full rank sequences were
//! computed independently with a separate computer-algebra implementation
//! and frozen here. Each test runs the public analysis entry point and
//! checks the complete profile, the curvature log, and the conclusion.

use std::sync::Arc;

use webrank::rank::{AnalyzeOptions, CurvatureVerdict, Sampler, Status};
use webrank::{analyze_rank, parse_expression, rho, AnalysisReport, Point, WebSpec};

fn web(vars: &[&str], integrals: &[&str]) -> WebSpec {
    let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    let exprs = integrals
        .iter()
        .map(|s| parse_expression(s, &names).expect("fixture expression parses"))
        .collect();
    WebSpec::new(names, exprs).expect("fixture web is valid")
}

fn analyzed(w: &WebSpec) -> AnalysisReport {
    let report = analyze_rank(w, &AnalyzeOptions::default());
    assert!(
        report.warnings.is_empty(),
        "unexpected warnings: {:?}",
        report.warnings
    );
    report
}

#[test]
fn planar_four_web_profile_and_rank() {
    let w = web(&["x", "y"], &["x", "y", "x+y+x*y", "x-y+x^5"]);
    let report = analyzed(&w);
    assert!(report.ordinariness.as_ref().unwrap().ordinary);
    assert_eq!(report.profile.rho, vec![2, 3, 3, 2, 2, 2]);
    assert_eq!(
        report.curvature,
        vec![
            (1, CurvatureVerdict::SkippedProfileDrop),
            (3, CurvatureVerdict::Vanishes),
        ]
    );
    assert_eq!(report.status, Status::RankDetermined);
    assert_eq!(report.rank, Some(2));
    assert_eq!(report.determined_level, Some(3));
}

#[test]
fn planar_eight_web_profile_and_rank() {
    let w = web(
        &["x", "y"],
        &[
            "x", "y", "x+y", "x-y", "x*y", "x^2+y^2", "x^2-y^2", "x^4+y^4",
        ],
    );
    let report = analyzed(&w);
    assert!(report.ordinariness.as_ref().unwrap().ordinary);
    assert_eq!(report.combinatorics.h0, 7);
    assert_eq!(report.combinatorics.pi_prime, 21);
    assert_eq!(
        report.profile.rho,
        vec![6, 11, 15, 18, 20, 21, 21, 20, 19, 19, 19]
    );
    assert_eq!(
        report.curvature,
        vec![
            (5, CurvatureVerdict::SkippedProfileDrop),
            (8, CurvatureVerdict::Vanishes),
        ]
    );
    assert_eq!(report.status, Status::RankDetermined);
    assert_eq!(report.rank, Some(19));
    assert_eq!(report.determined_level, Some(8));
}

#[test]
fn planar_seven_subweb_reaches_the_bound() {
    // Dropping the quartic integral from the eight-web leaves a web of
    // maximal rank, equal to the combinatorial bound.
    let w = web(
        &["x", "y"],
        &["x", "y", "x+y", "x-y", "x*y", "x^2+y^2", "x^2-y^2"],
    );
    let report = analyzed(&w);
    assert_eq!(report.combinatorics.pi_prime, 15);
    assert_eq!(report.status, Status::RankDetermined);
    assert_eq!(report.rank, Some(15));
}

#[test]
fn product_four_web_has_one_relation() {
    let w = web(&["x", "y", "z"], &["x", "y", "z", "x*y*z"]);
    let report = analyzed(&w);
    assert_eq!(report.profile.rho, vec![1, 1, 1]);
    assert_eq!(report.curvature, vec![(0, CurvatureVerdict::Vanishes)]);
    assert_eq!(report.status, Status::RankDetermined);
    assert_eq!(report.rank, Some(1));
    assert_eq!(report.determined_level, Some(0));
}

#[test]
fn quadric_five_web_flat_case() {
    // g(u,z) = u^2 + 2uz + 2z^2 over u = x+y: the curvature vanishes at
    // the first stationary step and a second relation exists.
    let w = web(
        &["x", "y", "z"],
        &["x", "y", "z", "x+y+z", "(x+y)^2+2*(x+y)*z+2*z^2"],
    );
    let report = analyzed(&w);
    assert_eq!(report.profile.rho, vec![2, 2, 2]);
    assert_eq!(report.curvature, vec![(0, CurvatureVerdict::Vanishes)]);
    assert_eq!(report.status, Status::RankDetermined);
    assert_eq!(report.rank, Some(2));
    assert_eq!(report.determined_level, Some(0));
}

#[test]
fn quadric_five_web_curved_case() {
    // g(u,z) = u^2 + 4uz + 3z^2: only the obvious relation survives.
    let w = web(
        &["x", "y", "z"],
        &["x", "y", "z", "x+y+z", "(x+y)^2+4*(x+y)*z+3*z^2"],
    );
    let report = analyzed(&w);
    assert_eq!(report.profile.rho, vec![2, 2, 1, 1, 1]);
    assert_eq!(
        report.curvature,
        vec![
            (0, CurvatureVerdict::SkippedProfileDrop),
            (2, CurvatureVerdict::Vanishes),
        ]
    );
    assert_eq!(report.status, Status::RankDetermined);
    assert_eq!(report.rank, Some(1));
    assert_eq!(report.determined_level, Some(2));
}

#[test]
fn quasi_parallel_eleven_web_profile_and_rank() {
    let w = web(
        &["x", "y", "z"],
        &[
            "x", "y", "z", "x+y+z", "x+2*y+z", "x+3*y+z", "x+y+5*z", "x+y+7*z", "x+11*y+z",
            "19*x+y+z", "x+y*z",
        ],
    );
    let report = analyzed(&w);
    let verdict = report.ordinariness.as_ref().unwrap();
    assert!(verdict.ordinary);
    assert_eq!(verdict.p_ranks, vec![3, 6, 10, 11]);
    assert_eq!(report.combinatorics.pi_prime, 14);
    assert_eq!(report.profile.rho, vec![8, 13, 14, 13, 13, 13]);
    assert_eq!(report.curvature, vec![(3, CurvatureVerdict::Vanishes)]);
    assert_eq!(report.status, Status::RankDetermined);
    assert_eq!(report.rank, Some(13));
    assert_eq!(report.determined_level, Some(3));
}

#[test]
fn parallel_ten_web_exceeds_the_bound() {
    // The ten-web of linear forms is not ordinary, and its rank ends up
    // strictly above the combinatorial bound for ordinary webs.
    let w = web(
        &["x", "y", "z"],
        &[
            "x", "y", "z", "x+y+z", "x+2*y+z", "x+3*y+z", "x+y+5*z", "x+y+7*z", "x+11*y+z",
            "19*x+y+z",
        ],
    );
    let report = analyzed(&w);
    let verdict = report.ordinariness.as_ref().unwrap();
    assert!(!verdict.ordinary);
    assert_eq!(verdict.p_ranks, vec![3, 6, 9]);
    assert_eq!(verdict.first_failure, Some(3));
    assert_eq!(report.combinatorics.pi_prime, 11);
    assert_eq!(report.profile.rho, vec![7, 11, 12, 12, 12]);
    assert_eq!(report.curvature, vec![(2, CurvatureVerdict::Vanishes)]);
    assert_eq!(report.status, Status::RankDetermined);
    assert_eq!(report.rank, Some(12));
    assert_eq!(report.determined_level, Some(2));
    assert!(
        report.justification.is_some(),
        "the affine stationarity explanation should be attached"
    );

    // The sequence stays at 12 beyond the scanned window.
    let points: Vec<Arc<Point>> = report.points.clone();
    assert_eq!(rho(&w, 5, &points, 1).unwrap().rho, 12);
}

#[test]
fn reports_are_reproducible_across_runs() {
    let w = web(&["x", "y"], &["x", "y", "x+y+x*y", "x-y+x^5"]);
    let first = analyze_rank(&w, &AnalyzeOptions::default());
    let second = analyze_rank(&w, &AnalyzeOptions::default());
    assert_eq!(first, second);

    // A different seed changes the points but not the conclusion.
    let other = analyze_rank(
        &w,
        &AnalyzeOptions {
            seed: 1,
            ..AnalyzeOptions::default()
        },
    );
    assert_ne!(first.points, other.points);
    assert_eq!(first.rank, other.rank);
    assert_eq!(first.profile.rho, other.profile.rho);
}

#[test]
fn char_determinant_route_agrees_on_the_corpus() {
    let webs = [
        web(&["x", "y"], &["x", "y", "x+y+x*y", "x-y+x^5"]),
        web(&["x", "y", "z"], &["x", "y", "z", "x*y*z"]),
        web(
            &["x", "y", "z"],
            &["x", "y", "z", "x+y+z", "(x+y)^2+4*(x+y)*z+3*z^2"],
        ),
    ];
    for w in &webs {
        let h0 = w.combinatorics().h0;
        let points = Sampler::new(5)
            .point_set(w, 1, true)
            .expect("sampling succeeds");
        for h in h0.max(2) - 1..=h0 + 1 {
            let via_kernel = rho(w, h, &points, 1).unwrap().rho;
            let via_residuals =
                webrank::rho_via_char_determinants(w, h, &points[0]).unwrap();
            assert_eq!(
                via_kernel, via_residuals,
                "routes disagree at level {h} for d = {}",
                w.d()
            );
        }
    }
}
