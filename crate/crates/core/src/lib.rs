//! Combinatorial machinery behind conditional-description fingerprints:
//! on-line bipartite matchings, randomness extractors, Trevisan-function
//! ingredients, and the encode/decode protocols built from them.
//!
//! Every randomized construction is driven by [`rng::SplitMix64`] from an
//! explicit seed; every exhaustive search is bounded by [`limits::Limits`].

pub mod bits;
pub mod combinatorics;
pub mod demo;
pub mod error;
pub mod extractor;
pub mod fingerprint;
pub mod graph;
pub mod limits;
pub mod offline;
pub mod online;
pub mod ratio;
pub mod registry;
pub mod rng;
pub mod trevisan;

pub use error::{Error, Result};
pub use graph::BipartiteGraph;
pub use limits::Limits;
