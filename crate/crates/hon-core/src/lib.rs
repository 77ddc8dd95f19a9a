//! Construction and analysis of higher-order networks (HON) from sequential
//! trajectory data.
//!
//! The pipeline is: parse trajectories ([`ingest`]), extract variable-order
//! dependency rules gated by an adaptive KL-divergence threshold ([`rules`]),
//! wire the rules into a weighted directed graph with in-edge and tail
//! rewiring ([`wiring`]), then quantify the representation with random-walk
//! simulation, entropy rate and return probability ([`walk`]) and PageRank
//! ([`rank`]). A synthetic grid-world generator with injected rules ([`synth`])
//! and a variable-order Markov context-tree baseline ([`vom`]) support
//! validation and comparison.

pub mod error;
pub mod export;
pub mod ingest;
pub mod rank;
pub mod rules;
pub mod synth;
pub mod vom;
pub mod walk;
pub mod wiring;

pub use error::HonError;
pub use ingest::{Corpus, ParseOptions, Trajectory, Vocab};
pub use rules::{ExtractionParams, RuleSet};
pub use wiring::HonNetwork;
