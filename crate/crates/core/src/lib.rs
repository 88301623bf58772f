//! Outcome-level evaluation of systematic-review screening runs.
//!
//! The crate recomputes meta-analytic review conclusions from the set of
//! publications a screening system retrieved and compares them against the
//! conclusions drawn from the complete evidence base. It also provides the
//! usual rank-based retrieval measures, a random-removal simulation, and a
//! Pareto view that trades retrieval effort against conclusion damage.
//!
//! Entry points:
//! - [`evidence`]: review data model plus parsers (RevMan XML subset,
//!   canonical JSON, study/publication mapping CSV, TREC qrels and runs).
//! - [`meta`]: study effects and pooling (Mantel-Haenszel, inverse variance,
//!   DerSimonian-Laird random effects).
//! - [`aspects`]: the five comparison aspects between an original and a
//!   recomputed outcome.
//! - [`ir`]: rank-based measures (MAP, recall@k%, nDCG, WSS@r, AURC).
//! - [`experiments`]: corpus assembly, run evaluation, removal simulation,
//!   Pareto frontier, correlation summaries.
//! - [`report`]: CSV/JSON serializers and SVG plot emitters.

pub mod aspects;
pub mod cli;
pub mod error;
pub mod evidence;
pub mod experiments;
pub mod ir;
pub mod meta;
pub mod report;

pub use error::{Error, Result};
