//! Red/blue bipartite parity matching lab.
//!
//! A library for two-colored bipartite graphs: a deterministic solver for
//! perfect matchings of prescribed red-edge parity (with labeling
//! certificates of infeasibility), the labeling-constraint LP relaxation,
//! slack-matrix construction, nonnegative-rank lower-bound machinery, and
//! the partition/distribution apparatus used to study the extension
//! complexity of these polytopes — all cross-checked at desk scale against
//! brute-force oracles.

pub mod balance;
pub mod bounds;
pub mod classify;
pub mod corpus;
pub mod enumerate;
pub mod family;
pub mod gadget;
pub mod graph;
pub mod labeling;
pub mod matching;
pub mod partition;
pub mod rat;
pub mod relaxation;
pub mod seeding;
pub mod simplex;
pub mod slack;
pub mod solver;
pub mod witness;

pub use graph::{Color, ColoredBipartiteGraph, Edge, Side};
pub use labeling::{Labeling, ParityTarget};
pub use matching::Matching;
pub use rat::Rat;
