//! Universal compaction of a long training sequence onto a frequency-pruned
//! suffix index, and average-common-length (ACL) classification of test
//! sequences against either the full index or its compaction.
//!
//! Every substring in this crate is a *backward context*: the string
//! `(s_i, s_{i-1}, …, s_{i-j+1})` read leftwards from a 1-based position `i`.
//! Positions exposed through the public API are 1-based; slices are 0-based.
//!
//! The crate is `no_std` and only needs `alloc`. The optional `rayon` feature
//! parallelises profile and window scoring; results do not depend on it.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(feature = "rayon")]
extern crate std;

pub mod classifier;
pub mod compaction;
mod error;
pub mod evaluation;
pub mod index;
pub mod rational;
mod sais;
pub mod sequence;

pub use classifier::{
    match_profile, similarity, sort_tests, AvgMode, Decision, FeatureSet, MatchBase, MatchProfile,
    Ranked, SimilarityReport, TrainingStats,
};
pub use compaction::{compact, CompactedTree, CompactionParams, Leaf, StandaloneTree};
pub use error::{Error, Result};
pub use evaluation::{
    error_rate, gen_synthetic, pruned_mass, sweep, window_eval, Background, EvalParams, EvalReport,
    FeatureSource, SweepGrid, SweepRow, SynthSpec, Synthetic,
};
pub use index::{EmpiricalProb, SuffixIndex};
pub use rational::Rational;
pub use sais::suffix_array;
pub use sequence::{context_at, windows, Alphabet, Code, Context, Format, Record, Sequence};
