//! Rendering of analysis results: a machine-readable JSON document with a
//! fixed field list, and a human text view that writes the rank sequence
//! the way it is usually quoted, e.g. `ρ₂=14 > ρ₃=ρ₄=13`.

use serde::{Deserialize, Serialize};

use crate::rank::{AnalysisReport, CurvatureVerdict, Status};
use crate::rational::format_rational;

/// One curvature verdict in the machine-readable report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvatureEntry {
    pub h: usize,
    pub verdict: String,
}

/// Machine-readable serialization of an analysis run.
///
/// Every field is exact: counts stay integers, and sample coordinates are
/// canonical `"p/q"` strings. The document round-trips losslessly through
/// JSON, and two runs with the same input and seed serialize to identical
/// bytes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub n: usize,
    pub d: usize,
    pub h0: usize,
    pub pi_prime: u64,
    pub pi_castelnuovo: u64,
    /// `null` when no usable sample point existed.
    pub ordinary: Option<bool>,
    /// The rank sequence starting at level 0.
    pub rho: Vec<usize>,
    pub curvature: Vec<CurvatureEntry>,
    pub status: String,
    pub rank: Option<usize>,
    pub seed: u64,
    /// Sample points, one coordinate vector per point.
    pub samples: Vec<Vec<String>>,
    pub warnings: Vec<String>,
}

/// Stable status labels used in reports and exit-code decisions.
pub fn status_label(status: Status) -> &'static str {
    match status {
        Status::RankDetermined => "RANK_DETERMINED",
        Status::RankZero => "RANK_ZERO",
        Status::Inconclusive => "INCONCLUSIVE",
    }
}

/// Stable verdict labels for the machine-readable report.
pub fn verdict_label(verdict: CurvatureVerdict) -> &'static str {
    match verdict {
        CurvatureVerdict::Vanishes => "vanishes",
        CurvatureVerdict::Nonzero => "nonzero",
        CurvatureVerdict::SkippedProfileDrop => "skipped_profile_drop",
        CurvatureVerdict::SkippedProjectionNotInjective => "skipped_projection_not_injective",
    }
}

impl ReportDocument {
    /// Projects an [`AnalysisReport`] onto the documented field list.
    pub fn from_report(report: &AnalysisReport) -> ReportDocument {
        ReportDocument {
            n: report.combinatorics.n,
            d: report.combinatorics.d,
            h0: report.combinatorics.h0,
            pi_prime: report.combinatorics.pi_prime,
            pi_castelnuovo: report.combinatorics.pi_castelnuovo,
            ordinary: report.ordinariness.as_ref().map(|v| v.ordinary),
            rho: report.profile.rho.clone(),
            curvature: report
                .curvature
                .iter()
                .map(|&(h, verdict)| CurvatureEntry {
                    h,
                    verdict: verdict_label(verdict).to_string(),
                })
                .collect(),
            status: status_label(report.status).to_string(),
            rank: report.rank,
            seed: report.seed,
            samples: report
                .points
                .iter()
                .map(|p| p.coords().iter().map(format_rational).collect())
                .collect(),
            warnings: report.warnings.clone(),
        }
    }

    /// Serializes the document as pretty-printed JSON (deterministic field
    /// order, no trailing newline).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

fn subscript(value: usize) -> String {
    const DIGITS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    value
        .to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap() as usize])
        .collect()
}

fn superscript(value: usize) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    value
        .to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap() as usize])
        .collect()
}

/// Writes the rank sequence with equal runs grouped, joined by `<`/`>`
/// according to the jumps: `ρ₀=2 < ρ₁=ρ₂=3 > ρ₃=ρ₄=2`.
fn rho_chain(rho: &[usize]) -> String {
    let mut out = String::new();
    let mut h = 0;
    while h < rho.len() {
        let mut end = h;
        while end + 1 < rho.len() && rho[end + 1] == rho[h] {
            end += 1;
        }
        if h > 0 {
            out.push_str(if rho[h] < rho[h - 1] { " > " } else { " < " });
        }
        for level in h..=end {
            out.push('ρ');
            out.push_str(&subscript(level));
            out.push('=');
        }
        out.push_str(&rho[h].to_string());
        h = end + 1;
    }
    out
}

fn curvature_line(entries: &[(usize, CurvatureVerdict)]) -> String {
    if entries.is_empty() {
        return "(no stationary step reached)".to_string();
    }
    entries
        .iter()
        .map(|&(h, verdict)| {
            let k = format!("K{}", superscript(h));
            match verdict {
                CurvatureVerdict::Vanishes => format!("{k} = 0"),
                CurvatureVerdict::Nonzero => format!("{k} ≠ 0"),
                CurvatureVerdict::SkippedProfileDrop => {
                    format!("{k} skipped (the sequence drops one level later)")
                }
                CurvatureVerdict::SkippedProjectionNotInjective => {
                    format!("{k} skipped (the next diagonal block is rank-deficient)")
                }
            }
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Renders the human-readable report.
pub fn render_text(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let comb = &report.combinatorics;
    out.push_str(&format!(
        "web: {} first integrals in {} variables\n",
        comb.d, comb.n
    ));
    out.push_str(&format!(
        "combinatorics: h0 = {}, pi' = {}, pi = {}\n",
        comb.h0, comb.pi_prime, comb.pi_castelnuovo
    ));
    let samples = if report.points.is_empty() {
        "none".to_string()
    } else {
        report
            .points
            .iter()
            .map(|p| {
                let coords: Vec<String> = p.coords().iter().map(format_rational).collect();
                format!("({})", coords.join(", "))
            })
            .collect::<Vec<_>>()
            .join(", ")
    };
    out.push_str(&format!("samples (seed {}): {}\n", report.seed, samples));
    match &report.ordinariness {
        Some(verdict) => {
            let mut line = format!(
                "ordinary: {} — diagonal-block ranks {:?}",
                if verdict.ordinary { "yes" } else { "no" },
                verdict.p_ranks
            );
            if let Some(level) = verdict.first_failure {
                line.push_str(&format!(" (first shortfall at level {level})"));
            }
            out.push_str(&line);
            out.push('\n');
        }
        None => out.push_str("ordinary: unknown (no usable sample points)\n"),
    }
    if !report.profile.rho.is_empty() {
        out.push_str(&format!(
            "rank sequence: {}\n",
            rho_chain(&report.profile.rho)
        ));
    }
    out.push_str(&format!(
        "curvature: {}\n",
        curvature_line(&report.curvature)
    ));
    let conclusion = match report.status {
        Status::RankDetermined => {
            let level = report.determined_level.expect("determined level set");
            let rank = report.rank.expect("rank set");
            format!(
                "ρ{}=ρ{}={} and K{}=0 ⇒ ρ(W) = {}",
                subscript(level),
                subscript(level + 1),
                rank,
                superscript(level),
                rank
            )
        }
        Status::RankZero => {
            let level = report.determined_level.expect("determined level set");
            format!("ρ{}=0 ⇒ ρ(W) = 0", subscript(level))
        }
        Status::Inconclusive => {
            format!("none up to the level cap {}", report.h_max)
        }
    };
    out.push_str(&format!("conclusion: {conclusion}\n"));
    if let Some(note) = &report.justification {
        out.push_str(&format!("note: {note}\n"));
    }
    for warning in &report.warnings {
        out.push_str(&format!("warning: {warning}\n"));
    }
    out.push_str(&format!("status: {}\n", status_label(report.status)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::rank::{analyze_rank, AnalyzeOptions};
    use crate::web::WebSpec;

    fn flat_three_web_report() -> AnalysisReport {
        let vars: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        let integrals = ["x", "y", "x+y"]
            .iter()
            .map(|s| parse_expression(s, &vars).unwrap())
            .collect();
        let web = WebSpec::new(vars, integrals).unwrap();
        analyze_rank(&web, &AnalyzeOptions::default())
    }

    #[test]
    fn document_round_trips_through_json() {
        let report = flat_three_web_report();
        let doc = ReportDocument::from_report(&report);
        let json = doc.to_json();
        let back: ReportDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(doc, back);
    }

    #[test]
    fn document_serialization_is_deterministic() {
        let report = flat_three_web_report();
        let a = ReportDocument::from_report(&report).to_json();
        let b = ReportDocument::from_report(&report).to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn text_report_mentions_the_conclusion() {
        let report = flat_three_web_report();
        let text = render_text(&report);
        assert!(text.contains("rank sequence: ρ₀=ρ₁=ρ₂=1"));
        assert!(text.contains("K⁰ = 0"));
        assert!(text.contains("ρ(W) = 1"));
        assert!(text.contains("status: RANK_DETERMINED"));
    }

    #[test]
    fn chain_groups_runs_and_marks_jumps() {
        assert_eq!(rho_chain(&[2, 3, 3, 2, 2]), "ρ₀=2 < ρ₁=ρ₂=3 > ρ₃=ρ₄=2");
        assert_eq!(rho_chain(&[14]), "ρ₀=14");
        assert_eq!(rho_chain(&[1, 0]), "ρ₀=1 > ρ₁=0");
    }
}
