//! Exact rank analysis of codimension-one webs given by rational first
//! integrals.
//!
//! The pipeline: parse the first integrals (`expr`), evaluate them to
//! truncated Taylor data at random rational points (`jet`), build the
//! universal coefficient tables and prolongation matrices (`web`), read off
//! the rank sequence `rho_h` by exact elimination (`linalg`, `rank`), and
//! when the sequence goes stationary, build the tautological connection on
//! the space of formal relations and test its curvature (`connection`).
//! Everything is exact big-rational arithmetic; randomness only picks the
//! sample points and is always seeded.

pub mod connection;
pub mod expr;
pub mod jet;
pub mod linalg;
pub mod multi_index;
pub mod rank;
pub mod rational;
pub mod report;
pub mod web;
pub mod webfile;

pub use connection::{curvature_vanishes, ConnectionError, CurvatureReport, SectionFrame};
pub use expr::{parse_expression, serialize_expression, Expression};
pub use jet::{eval_jet, Jet, JetError, Point};
pub use linalg::{JetMatrix, LinalgError, RationalMatrix};
pub use multi_index::MultiIndex;
pub use rank::{
    analyze_rank, check_general_position, check_ordinary, coordinate_web_has_relation, rho,
    rho_via_char_determinants, AnalysisReport, AnalyzeOptions, CurvatureVerdict,
    OrdinarinessVerdict, RankError, RankProfile, Sampler, Status,
};
pub use rational::Rational;
pub use report::{render_text, status_label, verdict_label, CurvatureEntry, ReportDocument};
pub use web::{Combinatorics, CTable, PointData, WebSpec};
pub use webfile::{load_web_file, parse_web_source, WebFileError};
