//! Defense toolkit against voice skill squatting.
//!
//! The pipeline learns phoneme confusion costs from a pronunciation
//! dictionary, builds a phonetic graph over a skill catalog, verifies skill
//! identities through backlinks on the developer's own site, filters a
//! user's browsing and app activity into trustworthy evidence, and turns
//! matched skills into enable/disable plans. The simulator replays
//! invocation experiments and measures the FAR/FRR trade-off.

pub mod canonical;
pub mod catalog;
#[cfg(feature = "cli")]
pub mod cli;
pub mod counterpart;
pub mod error;
pub mod graph;
pub mod identity;
pub mod phonetics;
pub mod planner;
pub mod simulator;

pub use catalog::{Catalog, Skill};
pub use error::{Error, Result};
pub use graph::{build_graph, DistanceTable, PhoneticGraph};
pub use phonetics::{CostMatrix, PhonemeSeq, PronunciationDict};
